use std::sync::Arc;

use axum::body::Bytes;
use axum::http::{header, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use tokio::net::TcpListener;

use super::Api;

/// Axum router that forwards every request to [`Api::handle`].
pub fn router(api: Arc<Api>) -> Router {
    Router::new().fallback(move |method: Method, uri: Uri, body: Bytes| {
        let api = Arc::clone(&api);
        async move {
            // Monte Carlo requests are CPU-bound; keep them off the reactor.
            let handled = tokio::task::spawn_blocking(move || {
                api.handle(method.as_str(), uri.path(), &body)
            })
            .await;
            match handled {
                Ok(r) => {
                    let status = StatusCode::from_u16(r.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
                    json_response(status, r.to_json())
                }
                Err(_) => json_response(
                    StatusCode::INTERNAL_SERVER_ERROR,
                    r#"{"schema_version":1,"error":{"code":"internal","message":"request handler panicked"}}"#.to_string(),
                ),
            }
        }
    })
}

fn json_response(status: StatusCode, body: String) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "application/json; charset=utf-8")],
        body,
    )
        .into_response()
}

/// Serves the API on an already bound listener until the task is dropped.
pub async fn serve(listener: TcpListener, api: Arc<Api>) -> std::io::Result<()> {
    axum::serve(listener, router(api)).await
}

//! The HTTP routes called in-process, then once over a real socket.

use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::Arc;

use effect_design::service_api::{serve, Api};
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let api = Api::default();
    let r = api.handle("POST", "/v1/ate", json!({"range": {"lo": 0.0, "hi": 0.2}, "p_null": 0.5}).to_string().as_bytes());
    println!("POST /v1/ate -> {} {}", r.status, r.payload().unwrap()["ate"]);

    let r = api.handle("POST", "/v1/sessions", b"{}");
    let id = r.payload().unwrap()["id"].as_str().unwrap().to_string();
    println!("POST /v1/sessions -> {} id {id}", r.status);
    let r = api.handle(
        "POST",
        &format!("/v1/sessions/{id}/advance"),
        json!({"payload": {"stage": "ate_pre", "ate_pre": 0.1}}).to_string().as_bytes(),
    );
    println!("advance out of order -> {} {}", r.status, r.error().unwrap()["code"]);

    let runtime = tokio::runtime::Runtime::new()?;
    let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let addr = listener.local_addr()?;
    runtime.spawn(serve(listener, Arc::new(api)));
    let mut stream = TcpStream::connect(addr)?;
    write!(stream, "GET /v1/scenarios HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n")?;
    let mut raw = String::new();
    stream.read_to_string(&mut raw)?;
    println!("GET http://{addr}/v1/scenarios -> {}", raw.lines().next().unwrap_or(""));
    Ok(())
}

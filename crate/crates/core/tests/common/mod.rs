pub mod oracle;
pub mod sessions;

//! Serves the mock models over the same HTTP contract the live clients use,
//! so the wire path can be exercised without external services.
//!
//! Routes:
//! - `POST /v1/chat/completions`: chat-completions request, answered from the
//!   language fixture. Unknown prompts get an empty `content`.
//! - `POST /v1/detect`: [`DetectRequest`], answered from the vision fixture
//!   keyed on `image_id`.

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use serde::Deserialize;
use serde_json::json;
use tiny_http::{Header, Method, Response, Server};

use super::backend::LanguageModel;
use super::http::DetectRequest;
use super::mock::{MockLanguageModel, MockVisionModel};
use super::prompt::{ChatMessage, ChatPrompt};
use super::LanguageError;

pub const CHAT_PATH: &str = "/v1/chat/completions";
pub const DETECT_PATH: &str = "/v1/detect";

#[derive(Deserialize)]
struct ChatRequest {
    messages: Vec<ChatMessage>,
}

pub struct MockServer {
    server: Arc<Server>,
    addr: SocketAddr,
    worker: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Bind to `addr` (use port 0 for an ephemeral port) and serve on a
    /// background thread until dropped.
    pub fn start(addr: &str, llm: MockLanguageModel, vlm: MockVisionModel) -> Result<Self, LanguageError> {
        let server = Server::http(addr).map_err(|e| LanguageError::BackendUnavailable(format!("bind {addr}: {e}")))?;
        let bound = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| LanguageError::BackendUnavailable("server is not bound to an IP address".into()))?;
        let server = Arc::new(server);
        let srv = Arc::clone(&server);
        let worker = std::thread::spawn(move || {
            for request in srv.incoming_requests() {
                handle(request, &llm, &vlm);
            }
        });
        Ok(MockServer { server, addr: bound, worker: Some(worker) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn chat_url(&self) -> String {
        format!("http://{}{}", self.addr, CHAT_PATH)
    }

    pub fn detect_url(&self) -> String {
        format!("http://{}{}", self.addr, DETECT_PATH)
    }

    /// Block the calling thread until the server stops.
    pub fn wait(mut self) {
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

fn json_response(status: u16, body: serde_json::Value) -> Response<std::io::Cursor<Vec<u8>>> {
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
    Response::from_data(body.to_string().into_bytes()).with_status_code(status).with_header(header)
}

fn handle(mut request: tiny_http::Request, llm: &MockLanguageModel, vlm: &MockVisionModel) {
    let mut body = String::new();
    let response = if request.as_reader().read_to_string(&mut body).is_err() {
        json_response(400, json!({"error": "unreadable body"}))
    } else {
        match (request.method(), request.url()) {
            (Method::Post, CHAT_PATH) => match serde_json::from_str::<ChatRequest>(&body) {
                Ok(chat) => {
                    let content = llm.complete(&ChatPrompt { messages: chat.messages }).unwrap_or_default();
                    json_response(
                        200,
                        json!({
                            "object": "chat.completion",
                            "choices": [{
                                "index": 0,
                                "message": {"role": "assistant", "content": content},
                                "finish_reason": "stop"
                            }]
                        }),
                    )
                }
                Err(e) => json_response(400, json!({"error": e.to_string()})),
            },
            (Method::Post, DETECT_PATH) => match serde_json::from_str::<DetectRequest>(&body) {
                Ok(req) => {
                    let id = req.image_id.unwrap_or_default();
                    let dets = vlm.detections_for(&id, &req.queries);
                    json_response(200, serde_json::to_value(dets).expect("detections serialize"))
                }
                Err(e) => json_response(400, json!({"error": e.to_string()})),
            },
            _ => json_response(404, json!({"error": "not found"})),
        }
    };
    if let Err(e) = request.respond(response) {
        log::warn!("mock server: failed to respond: {e}");
    }
}

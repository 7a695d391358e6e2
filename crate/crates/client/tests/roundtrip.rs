use std::sync::Arc;

use tokio::net::TcpListener;
use tokio::sync::oneshot;

use zwm_client::{Client, ClientError};
use zwm_core::api::RegisterRequest;
use zwm_core::{CompareMode, Query, Registry};
use zwm_server::{serve, AppState};

const SAMPLE: &str = "this is a test and this is fun";

struct Running {
    client: Client,
    stop: Option<oneshot::Sender<()>>,
    _dir: tempfile::TempDir,
}

impl Drop for Running {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
    }
}

async fn start() -> Running {
    let dir = tempfile::tempdir().unwrap();
    let registry = Arc::new(Registry::open(dir.path().join("ca.jsonl")).unwrap());
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = oneshot::channel();
    tokio::spawn(serve(listener, AppState::new(registry), async {
        let _ = rx.await;
    }));
    Running {
        client: Client::new(format!("http://{addr}")),
        stop: Some(tx),
        _dir: dir,
    }
}

#[tokio::test]
async fn register_verify_find() {
    let server = start().await;
    let c = &server.client;
    assert_eq!(c.health().await.unwrap()["status"], "ok");

    let record = c
        .register(&RegisterRequest {
            author: "Zoë B".into(),
            text: SAMPLE.into(),
            keyword: None,
            min_count: None,
        })
        .await
        .unwrap();
    assert_eq!(record.keyword, "is");

    let ok = c.verify_record(SAMPLE, &record.id, None).await.unwrap();
    assert!(!ok.tampered);
    let bad = c.verify_record("this is a test", &record.id, Some(CompareMode::LcsSymbol)).await.unwrap();
    assert!(bad.tampered);

    let by_author = c
        .find(&Query {
            author: Some("Zoë B".into()),
            ..Query::default()
        })
        .await
        .unwrap();
    assert_eq!(by_author, vec![record.clone()]);
    let by_digest = c
        .find(&Query {
            text_digest: Some(record.text_digest.clone()),
            ..Query::default()
        })
        .await
        .unwrap();
    assert_eq!(by_digest.len(), 1);
    assert_eq!(c.find(&Query::default()).await.unwrap().len(), 1);
}

#[tokio::test]
async fn api_errors_surface_status_and_kind() {
    let server = start().await;
    let err = server.client.verify_record(SAMPLE, "0123456789abcdef", None).await.unwrap_err();
    assert_eq!(err.status().map(|s| s.as_u16()), Some(404));
    assert!(matches!(err, ClientError::Api { ref body, .. } if body.error == "UnknownRecord"));

    let err = server
        .client
        .register(&RegisterRequest {
            author: "a".into(),
            text: SAMPLE.into(),
            keyword: Some("absent".into()),
            min_count: None,
        })
        .await
        .unwrap_err();
    assert_eq!(err.status().map(|s| s.as_u16()), Some(422));
}

#[tokio::test]
async fn unreachable_server_is_transport_error() {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let err = Client::new(format!("http://{addr}")).health().await.unwrap_err();
    assert!(matches!(err, ClientError::Transport(_)));
}

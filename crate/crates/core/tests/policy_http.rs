//! Exercises the HTTP policy client against an in-process server that
//! speaks the wire protocol.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use retroplan::chem::Molecule;
use retroplan::policy::{propose, HttpPolicy, PolicyConfig, PolicyError, RouteSampler};

/// Serves `responses` in order, one per connection; reports each request
/// as (path, body).
fn serve(responses: Vec<(u16, String)>) -> (String, mpsc::Receiver<(String, serde_json::Value)>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let path = line.split_whitespace().nth(1).unwrap_or("").to_string();
            let mut len = 0;
            loop {
                let mut h = String::new();
                reader.read_line(&mut h).unwrap();
                if h.trim().is_empty() {
                    break;
                }
                if let Some((k, v)) = h.split_once(':') {
                    if k.eq_ignore_ascii_case("content-length") {
                        len = v.trim().parse().unwrap();
                    }
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            tx.send((path, serde_json::from_slice(&buf).unwrap_or(serde_json::Value::Null))).unwrap();
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, rx)
}

#[test]
fn propose_round_trip() {
    let body = serde_json::json!({"proposals": [
        {"smarts": "[C:1](=[O:2])[N:3]>>[C:1](=[O:2])[OH].[N:3]", "log_prob": -0.2},
        {"smarts": "garbage", "log_prob": -0.5},
        {"smarts": "[C:1](=[O:2])[O:3]>>[C:1](=[O:2])[OH].[O:3]", "log_prob": -1.5},
    ]});
    let (url, rx) = serve(vec![(200, body.to_string())]);
    let policy = HttpPolicy::new(&url);
    let target = Molecule::parse("CNC(C)=O").unwrap();
    let out = propose(&policy, &target, &PolicyConfig::default(), None, Some("<STEPS=2>")).unwrap();
    assert_eq!(out.proposals.len(), 2);
    assert_eq!(out.invalid, 1);
    assert_eq!(out.proposals[0].log_prob, -0.2);
    let (path, req) = rx.recv().unwrap();
    assert_eq!(path, "/v1/propose");
    assert_eq!(req["smiles"], target.canonical_smiles());
    assert_eq!(req["k"], 10);
    assert_eq!(req["condition"], "<STEPS=2>");
}

#[test]
fn propose_route_round_trip() {
    let body = serde_json::json!({"routes": [
        {"templates": ["[C:1](=[O:2])[N:3]>>[C:1](=[O:2])[OH].[N:3]"], "log_prob": -0.7},
    ]});
    let (url, rx) = serve(vec![(200, body.to_string())]);
    let policy = HttpPolicy::new(&url);
    let routes = policy.sample_routes(&Molecule::parse("CNC(C)=O").unwrap(), 10, None).unwrap();
    assert_eq!(routes.len(), 1);
    assert_eq!(routes[0].log_prob, -0.7);
    let (path, req) = rx.recv().unwrap();
    assert_eq!(path, "/v1/propose_route");
    assert_eq!(req["n_samples"], 10);
    assert!(req.get("condition").is_none());
}

#[test]
fn non_success_status_is_unavailable() {
    let (url, _rx) = serve(vec![(503, "{}".to_string()), (400, "{}".to_string())]);
    let policy = HttpPolicy::new(&url);
    let target = Molecule::parse("CC").unwrap();
    let err = propose(&policy, &target, &PolicyConfig::default(), None, None).unwrap_err();
    assert!(matches!(err, PolicyError::BackendUnavailable(_)), "{err:?}");
    let err = policy.sample_routes(&target, 5, None).unwrap_err();
    assert!(matches!(err, PolicyError::BackendUnavailable(_)), "{err:?}");
}

#[test]
fn unreachable_server_is_unavailable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let policy = HttpPolicy::new(&format!("http://127.0.0.1:{port}"));
    let err = propose(&policy, &Molecule::parse("CC").unwrap(), &PolicyConfig::default(), None, None).unwrap_err();
    assert!(matches!(err, PolicyError::BackendUnavailable(_)));
}

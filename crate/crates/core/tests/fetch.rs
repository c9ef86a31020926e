use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use zetagaps::cache::{cache_path, fetch_remote, read_cache, write_cache};
use zetagaps::{Error, TextFormat};

const BODY: &str = "14.134725142\n21.022039639\n25.010857580\n30.424876126\n32.935061588\n";

/// Serves `BODY` to every request and counts how many it answered.
fn serve() -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/zeros.txt", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = match stream {
                Ok(s) => s,
                Err(_) => continue,
            };
            let mut buf = [0u8; 4096];
            let _ = stream.read(&mut buf);
            counter.fetch_add(1, Ordering::SeqCst);
            let resp = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: text/plain\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{BODY}",
                BODY.len()
            );
            let _ = stream.write_all(resp.as_bytes());
        }
    });
    (url, hits)
}

#[test]
fn cold_then_warm_cache() {
    let (url, hits) = serve();
    let dir = tempfile::tempdir().unwrap();
    let cold = fetch_remote(&url, dir.path(), TextFormat::Plain).unwrap();
    assert_eq!(cold.len(), 5);
    assert_eq!(hits.load(Ordering::SeqCst), 1);
    assert!(cache_path(&url, dir.path()).exists());

    let warm = fetch_remote(&url, dir.path(), TextFormat::Plain).unwrap();
    assert_eq!(hits.load(Ordering::SeqCst), 1);
    assert_eq!(warm.ordinates(), cold.ordinates());
}

#[test]
fn warm_cache_needs_no_network() {
    let dir = tempfile::tempdir().unwrap();
    let url = "http://127.0.0.1:9/unreachable.txt";
    write_cache(&cache_path(url, dir.path()), &[14.134725142, 21.022039639]).unwrap();
    let t = fetch_remote(url, dir.path(), TextFormat::Plain).unwrap();
    assert_eq!(t.ordinates(), &[14.134725142, 21.022039639]);
}

#[test]
fn unreachable_without_cache_is_a_fetch_error() {
    let dir = tempfile::tempdir().unwrap();
    let err =
        fetch_remote("http://127.0.0.1:9/none.txt", dir.path(), TextFormat::Plain).unwrap_err();
    assert!(matches!(err, Error::Fetch(_)), "{err:?}");
}

#[test]
fn corrupted_cache_is_an_integrity_error() {
    let dir = tempfile::tempdir().unwrap();
    let url = "http://127.0.0.1:9/corrupt.txt";
    let path = cache_path(url, dir.path());
    write_cache(&path, &[1.0, 2.0, 3.0]).unwrap();

    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] = b'X';
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(
        fetch_remote(url, dir.path(), TextFormat::Plain),
        Err(Error::Integrity(_))
    ));

    bytes[0] = b'Z';
    bytes[14] ^= 0x01;
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(read_cache(&path), Err(Error::Integrity(_))));
}

#[test]
fn file_urls_are_cached_too() {
    let src = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(src.path(), BODY).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let url = format!("file://{}", src.path().display());
    let t = fetch_remote(&url, dir.path(), TextFormat::Plain).unwrap();
    assert_eq!(t.len(), 5);
    assert!(cache_path(&url, dir.path()).exists());
}

//! Bounded-parallel batch generation.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::{GatewayError, Gateway, GenerationRequest, GenerationResponse};

/// Runs every request on at most `parallelism` worker threads. Results line
/// up with `requests`; failures stay inline.
pub fn batch_generate(
    gateway: &Gateway,
    requests: &[GenerationRequest],
    backend_id: &str,
    parallelism: usize,
) -> Vec<Result<GenerationResponse, GatewayError>> {
    let workers = parallelism.clamp(1, requests.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<GenerationResponse, GatewayError>>>> =
        Mutex::new((0..requests.len()).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(request) = requests.get(i) else { break };
                let result = gateway.generate(request, backend_id);
                slots.lock().expect("slot lock")[i] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .expect("slot lock")
        .into_iter()
        .map(|r| r.expect("every request ran"))
        .collect()
}

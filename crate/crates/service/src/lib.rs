//! Enrollment, training and identification over HTTP.
//!
//! Fingerprinting modules post labeled bursts to an append-only store. A train
//! request snapshots the store, evaluates the requested algorithm with the
//! harness on a background worker and registers the fitted model; identify
//! requests then run that model on unlabeled records.

pub mod api;
pub mod error;
pub mod registry;
pub mod store;
pub mod wire;

use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use wfid::eval::SearchBudget;

pub use error::{Result, ServiceError};
pub use registry::Registry;
pub use store::Store;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub store_dir: PathBuf,
    /// Worker threads for harness jobs; `None` uses every core.
    pub harness_threads: Option<usize>,
    pub default_seed: u64,
    /// Budget for train requests that do not carry one.
    pub budget: SearchBudget,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            store_dir: PathBuf::from("wfid-store"),
            harness_threads: None,
            default_seed: 42,
            budget: SearchBudget::default(),
        }
    }
}

pub struct AppState {
    pub config: ServiceConfig,
    pub store: Mutex<Store>,
    pub registry: Mutex<Registry>,
    pool: Option<rayon::ThreadPool>,
}

impl AppState {
    pub fn open(config: ServiceConfig) -> Result<Arc<Self>> {
        let store = Store::open(&config.store_dir)?;
        let registry = Registry::open(&config.store_dir)?;
        let pool = match config.harness_threads {
            Some(n) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| ServiceError::Invalid(format!("harness thread pool: {e}")))?,
            ),
            None => None,
        };
        Ok(Arc::new(Self {
            config,
            store: Mutex::new(store),
            registry: Mutex::new(registry),
            pool,
        }))
    }

    pub(crate) fn run_harness<T: Send>(&self, job: impl FnOnce() -> T + Send) -> T {
        match &self.pool {
            Some(pool) => pool.install(job),
            None => job(),
        }
    }
}

/// Serves on `listener` until `shutdown` resolves, then syncs the store.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<()> {
    axum::serve(listener, api::router(state.clone()))
        .with_graceful_shutdown(shutdown)
        .await?;
    state.store.lock().expect("store lock").flush()
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

//! HTTP consultation service and command-line tools around `advisor-core`.

pub mod api;
pub mod cli;
pub mod error;
pub mod store;
pub mod views;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use advisor_core::kb_admin::{AdminError, KbStore};

pub use api::{router, AppState};
pub use error::ApiError;
pub use store::{SessionStore, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Kb(#[from] AdminError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("server failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Loads the KB and restores persisted sessions.
pub fn build_state(kb_dir: &Path, data_dir: &Path) -> Result<Arc<AppState>, ServeError> {
    let kb = KbStore::open(kb_dir)?;
    let (sessions, skipped) = SessionStore::open(data_dir, &kb.current())?;
    for (path, reason) in skipped {
        tracing::warn!(path = %path.display(), %reason, "skipping stored session");
    }
    Ok(Arc::new(AppState { kb_dir: kb_dir.to_path_buf(), kb, sessions }))
}

pub struct ServeConfig {
    pub addr: SocketAddr,
    pub kb_dir: PathBuf,
    pub data_dir: PathBuf,
}

/// Serves until ctrl-c. `on_ready` receives the bound address.
pub async fn serve(config: ServeConfig, on_ready: impl FnOnce(SocketAddr)) -> Result<(), ServeError> {
    let state = build_state(&config.kb_dir, &config.data_dir)?;
    let listener = tokio::net::TcpListener::bind(config.addr)
        .await
        .map_err(|source| ServeError::Bind { addr: config.addr, source })?;
    let addr = listener.local_addr()?;
    tracing::info!(%addr, sessions = state.sessions.len(), "serving");
    on_ready(addr);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

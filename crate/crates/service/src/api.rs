use std::str::FromStr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};
use wfid::hyper::algorithm_names;
use wfid::Algorithm;

use crate::error::{Result, ServiceError};
use crate::registry::{self, SNAPSHOTS_DIR};
use crate::wire::*;
use crate::AppState;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/fingerprints", post(ingest))
        .route("/v1/devices", get(devices))
        .route("/v1/train", post(train))
        .route("/v1/models/{id}", get(model))
        .route("/v1/models/{id}/identify", post(identify))
        .with_state(state)
}

fn body<T>(payload: std::result::Result<Json<T>, JsonRejection>) -> Result<T> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ServiceError::Invalid(format!("malformed payload: {}", e.body_text())))
}

async fn blocking<T, F>(f: F) -> Result<T>
where
    F: FnOnce() -> Result<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Invalid(format!("worker failed: {e}")))?
}

async fn health() -> Json<Value> {
    Json(json!({ "status": "ok" }))
}

async fn ingest(
    State(state): State<Arc<AppState>>,
    payload: std::result::Result<Json<FingerprintBurst>, JsonRejection>,
) -> Result<(StatusCode, Json<IngestAck>)> {
    let burst = body(payload)?;
    let ack = blocking(move || state.store.lock().expect("store lock").ingest(burst)).await?;
    Ok((StatusCode::ACCEPTED, Json(ack)))
}

async fn devices(State(state): State<Arc<AppState>>) -> Json<DeviceSummary> {
    let devices = state.store.lock().expect("store lock").device_counts();
    Json(DeviceSummary { devices })
}

async fn train(
    State(state): State<Arc<AppState>>,
    payload: std::result::Result<Json<TrainRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<TrainAccepted>)> {
    let req = body(payload)?;
    let algorithm = Algorithm::from_str(&req.algorithm).map_err(|_| {
        ServiceError::Invalid(format!(
            "unknown algorithm `{}`; expected one of {}",
            req.algorithm,
            algorithm_names().join(", ")
        ))
    })?;
    if algorithm.kind() != req.kind {
        return Err(ServiceError::Invalid(format!(
            "{algorithm} trains on {} data, not {}",
            algorithm.kind(),
            req.kind
        )));
    }
    let budget = req.budget.unwrap_or_else(|| state.config.budget.clone());
    budget.validate()?;
    let seed = req.seed.unwrap_or(state.config.default_seed);

    let (dataset, offset) = state.store.lock().expect("store lock").snapshot(req.kind)?;
    let id = {
        let mut reg = state.registry.lock().expect("registry lock");
        let id = reg.next_id();
        reg.insert(ModelEntry {
            model_id: id.clone(),
            status: ModelStatus::Training,
            kind: req.kind,
            algorithm,
            protocol: req.protocol,
            seed,
            snapshot_id: format!("{}@{offset}", req.kind),
            snapshot_records: dataset.len(),
            hyperparameters: None,
            metrics: None,
            reason: None,
        })?;
        id
    };

    let job_id = id.clone();
    let job_state = state.clone();
    tokio::task::spawn_blocking(move || {
        let snapshot = job_state.config.store_dir.join(SNAPSHOTS_DIR).join(format!("{job_id}.csv"));
        let outcome = wfid::io::write_dataset(&snapshot, &dataset)
            .map_err(ServiceError::from)
            .and_then(|()| {
                job_state.run_harness(|| registry::train(algorithm, &dataset, req.protocol, &budget, seed))
            });
        if let Err(e) = job_state.registry.lock().expect("registry lock").complete(&job_id, outcome) {
            eprintln!("could not record the outcome of {job_id}: {e}");
        }
    });
    Ok((StatusCode::ACCEPTED, Json(TrainAccepted { model_id: id })))
}

async fn model(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<ModelEntry>> {
    Ok(Json(state.registry.lock().expect("registry lock").get(&id)?.clone()))
}

async fn identify(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    payload: std::result::Result<Json<IdentifyRequest>, JsonRejection>,
) -> Result<Json<IdentifyResponse>> {
    let req = body(payload)?;
    let model = state.registry.lock().expect("registry lock").model(&id)?;
    let results = blocking(move || {
        req.records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if r.device_id.is_some() || r.location_id.is_some() {
                    return Err(ServiceError::Invalid(format!(
                        "records[{i}]: identification records must not carry labels"
                    )));
                }
                if r.values.len() != model.num_attributes {
                    return Err(ServiceError::Invalid(format!(
                        "records[{i}].values: expected {} values, found {}",
                        model.num_attributes,
                        r.values.len()
                    )));
                }
                Ok(Identification {
                    device_id: model.predict(&r.values)?,
                    probabilities: model.predict_proba(&r.values)?,
                })
            })
            .collect::<Result<Vec<_>>>()
    })
    .await?;
    Ok(Json(IdentifyResponse { model_id: id, results }))
}

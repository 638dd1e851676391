//! Session-oriented HTTP API over the TDMA scheduler.
//!
//! Every session owns a field, its routing tree and interference graph, and a
//! scheduler cursor. Solves run on the blocking pool while the session is
//! locked, so one session never steps concurrently with itself.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use anyhow::Context;
use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use sbmis::formulations::GraphFeatures;
use sbmis::mis::{BaselineSolver, MisAlgorithm, MisSolver, SolutionSource};
use sbmis::sb::SbParams;
use sbmis::tdma::{
    build_unit_graph, validate_schedule, Condition, Field, InterferenceClass, Schedule, Scheduler, SlotTrace,
};
use sbmis::tuning::{EstimatorModel, SelectorModel};

/// Largest field the service will generate.
pub const MAX_SENSORS: usize = 4000;

pub const ESTIMATOR_FILE: &str = "estimator.json";
pub const SELECTOR_FILE: &str = "selector.json";

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub addr: SocketAddr,
    pub static_dir: Option<PathBuf>,
    pub idle_timeout: Duration,
}

/// Solver configured from whichever model files exist in `dir`.
pub fn load_models(dir: Option<&Path>) -> anyhow::Result<MisSolver> {
    let mut s = MisSolver::new();
    let Some(dir) = dir else { return Ok(s) };
    if !dir.is_dir() {
        anyhow::bail!("models directory {} does not exist", dir.display());
    }
    let read = |name: &str| -> anyhow::Result<Option<String>> {
        let p = dir.join(name);
        if p.exists() {
            Ok(Some(std::fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display()))?))
        } else {
            Ok(None)
        }
    };
    if let Some(text) = read(ESTIMATOR_FILE)? {
        s = s.with_estimator(serde_json::from_str::<EstimatorModel>(&text).context("bad estimator model")?);
        log::info!("loaded {ESTIMATOR_FILE}");
    }
    if let Some(text) = read(SELECTOR_FILE)? {
        s = s.with_selector(serde_json::from_str::<SelectorModel>(&text).context("bad selector model")?);
        log::info!("loaded {SELECTOR_FILE}");
    }
    Ok(s)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

struct Session {
    seed: u64,
    last_used: Mutex<Instant>,
    scheduler: Mutex<Scheduler>,
}

impl Session {
    fn touch(&self) {
        *lock(&self.last_used) = Instant::now();
    }
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

struct Inner {
    sessions: Mutex<HashMap<String, Arc<Session>>>,
    next_id: AtomicU64,
    solver: Arc<MisSolver>,
    idle_timeout: Duration,
}

/// Shared service state.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(solver: MisSolver, idle_timeout: Duration) -> Self {
        Self(Arc::new(Inner {
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            solver: Arc::new(solver),
            idle_timeout,
        }))
    }

    /// Drops sessions idle for longer than the timeout; returns how many.
    pub fn sweep(&self) -> usize {
        let timeout = self.0.idle_timeout;
        let mut sessions = lock(&self.0.sessions);
        let before = sessions.len();
        sessions.retain(|_, s| lock(&s.last_used).elapsed() <= timeout);
        before - sessions.len()
    }

    pub fn session_count(&self) -> usize {
        lock(&self.0.sessions).len()
    }

    fn insert(&self, seed: u64, scheduler: Scheduler) -> String {
        self.sweep();
        let id = format!("f{}", self.0.next_id.fetch_add(1, Ordering::Relaxed));
        let s = Session { seed, last_used: Mutex::new(Instant::now()), scheduler: Mutex::new(scheduler) };
        lock(&self.0.sessions).insert(id.clone(), Arc::new(s));
        id
    }

    fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sweep();
        let s = lock(&self.0.sessions).get(id).cloned();
        let s = s.ok_or_else(|| ApiError::not_found(format!("unknown field id {id:?}")))?;
        s.touch();
        Ok(s)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/field", post(create_field))
        .route("/api/field/{id}", get(get_field))
        .route("/api/field/{id}/step", post(step_field))
        .route("/api/field/{id}/run", post(run_field))
        .route("/api/field/{id}/reset", post(reset_field))
        .route("/api/benchmark", post(run_benchmark))
        .route("/api/{*rest}", axum::routing::any(api_not_found))
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(state)
}

pub async fn serve(solver: MisSolver, opts: ServeOptions) -> anyhow::Result<()> {
    let state = AppState::new(solver, opts.idle_timeout);
    let mut app = router(state.clone());
    if let Some(dir) = &opts.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    let sweeper = state.clone();
    let period = opts.idle_timeout.clamp(Duration::from_secs(1), Duration::from_secs(60));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            let n = sweeper.sweep();
            if n > 0 {
                log::info!("expired {n} idle sessions");
            }
        }
    });
    let listener =
        tokio::net::TcpListener::bind(opts.addr).await.with_context(|| format!("cannot bind {}", opts.addr))?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

async fn api_not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method not allowed")
}

fn parse_body<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

/// Field generation request shared by `/api/field` and `/api/benchmark`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldRequest {
    pub n_s: Option<usize>,
    pub radius: Option<f64>,
    pub class: Option<InterferenceClass>,
    #[serde(default)]
    pub seed: u64,
}

impl FieldRequest {
    fn condition(&self) -> Result<Condition, ApiError> {
        let n_s = self.n_s.ok_or_else(|| ApiError::bad_request("n_s is required"))?;
        if n_s == 0 || n_s > MAX_SENSORS {
            return Err(ApiError::bad_request(format!("n_s must be in 1..={MAX_SENSORS}")));
        }
        match (self.radius, self.class) {
            (Some(_), Some(_)) => Err(ApiError::bad_request("give either radius or class, not both")),
            (Some(r), None) if !(r > 0.0 && r <= 2.0) => Err(ApiError::bad_request("radius must be in (0, 2]")),
            (Some(r), None) => Ok(Condition::radius(n_s, r)),
            (None, c) => Ok(Condition::class(n_s, c.unwrap_or(InterferenceClass::Lif))),
        }
    }

    fn field(&self) -> Result<Field, ApiError> {
        self.condition()?.field(self.seed).map_err(|e| ApiError::bad_request(e.to_string()))
    }
}

#[derive(Debug, Serialize)]
pub struct Placement {
    pub n_s: usize,
    pub radius: f64,
    pub bs: [f64; 2],
    /// Sensor `i` is at `positions[i - 1]`.
    pub positions: Vec<[f64; 2]>,
}

/// Node ids as used by the scheduler: 0 is the base station.
#[derive(Debug, Serialize)]
pub struct EdgeList {
    pub nodes: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Serialize)]
pub struct TreeView {
    /// `parent[v]` for every node; `null` for the base station.
    pub parent: Vec<Option<usize>>,
    pub hops: Vec<usize>,
    pub depth: usize,
}

#[derive(Debug, Serialize)]
pub struct FieldView {
    pub field_id: String,
    pub seed: u64,
    pub placement: Placement,
    pub unit_graph: EdgeList,
    pub tree: TreeView,
    pub interference: EdgeList,
}

#[derive(Debug, Serialize)]
pub struct MisProblem {
    pub leaf_graph: EdgeList,
    pub features: GraphFeatures,
    pub params: Option<SbParams>,
    pub engine: SolutionSource,
    pub fallback: bool,
}

#[derive(Debug, Serialize)]
pub struct StepView {
    /// 1-based slot number just scheduled, or the last slot once done.
    pub slot_k: usize,
    pub transmitting_nodes: Vec<usize>,
    pub mis_problem: Option<MisProblem>,
    pub done: bool,
}

#[derive(Debug, Serialize)]
pub struct ScheduleView {
    pub slots: Vec<Vec<usize>>,
    pub total_slots: usize,
    pub elapsed_s: f64,
}

impl From<Schedule> for ScheduleView {
    fn from(s: Schedule) -> Self {
        Self { total_slots: s.total_slots(), slots: s.slots, elapsed_s: s.elapsed_s }
    }
}

#[derive(Debug, Serialize)]
pub struct SessionView {
    pub field_id: String,
    pub seed: u64,
    pub cursor: usize,
    pub done: bool,
    pub placement: Placement,
    pub tree: TreeView,
    pub interference: EdgeList,
    pub schedule: ScheduleView,
    pub trace: Vec<SlotTrace>,
}

fn placement(f: &Field) -> Placement {
    Placement { n_s: f.n_s(), radius: f.radius, bs: f.bs, positions: f.positions.clone() }
}

fn edge_list(nodes: Vec<usize>, edges: impl IntoIterator<Item = (usize, usize)>) -> EdgeList {
    EdgeList { nodes, edges: edges.into_iter().map(|(a, b)| [a, b]).collect() }
}

fn tree_view(s: &Scheduler) -> TreeView {
    let t = s.tree();
    TreeView { parent: t.parent.clone(), hops: t.hops(), depth: t.depth() }
}

fn interference_view(s: &Scheduler) -> EdgeList {
    edge_list((1..=s.field().n_s()).collect(), s.interference().edges().iter().copied())
}

fn field_view(id: String, seed: u64, s: &Scheduler) -> FieldView {
    let unit = build_unit_graph(s.field());
    FieldView {
        field_id: id,
        seed,
        placement: placement(s.field()),
        unit_graph: edge_list((0..=s.field().n_s()).collect(), unit.edges().iter().copied()),
        tree: tree_view(s),
        interference: interference_view(s),
    }
}

fn session_view(id: &str, seed: u64, s: &Scheduler) -> SessionView {
    SessionView {
        field_id: id.to_string(),
        seed,
        cursor: s.slots().len(),
        done: s.is_done(),
        placement: placement(s.field()),
        tree: tree_view(s),
        interference: interference_view(s),
        schedule: s.schedule().into(),
        trace: s.trace().to_vec(),
    }
}

fn step_view(s: &Scheduler, t: &SlotTrace) -> Result<StepView, ApiError> {
    if !s.interference().is_independent(&t.scheduled) {
        return Err(ApiError::internal(format!("slot {} transmitters interfere", t.slot)));
    }
    let g = s.interference().induced(&t.leaves);
    let leaf_graph = edge_list(t.leaves.clone(), g.edges().iter().map(|&(a, b)| (t.leaves[a], t.leaves[b])));
    Ok(StepView {
        slot_k: t.slot,
        transmitting_nodes: t.scheduled.clone(),
        mis_problem: Some(MisProblem {
            leaf_graph,
            features: t.features,
            params: t.params,
            engine: t.engine,
            fallback: t.fallback,
        }),
        done: s.is_done(),
    })
}

async fn create_field(State(state): State<AppState>, body: Bytes) -> ApiResult<FieldView> {
    let req: FieldRequest = parse_body(&body)?;
    req.condition()?;
    let seed = req.seed;
    let scheduler =
        blocking(move || Scheduler::new(req.field()?, seed).map_err(|e| ApiError::bad_request(e.to_string()))).await?;
    let id = state.insert(seed, scheduler.clone());
    Ok(Json(field_view(id, seed, &scheduler)))
}

async fn get_field(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<SessionView> {
    let s = state.session(&id)?;
    let view = session_view(&id, s.seed, &lock(&s.scheduler));
    Ok(Json(view))
}

async fn step_field(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<StepView> {
    let s = state.session(&id)?;
    let solver = state.0.solver.clone();
    blocking(move || {
        let mut sched = lock(&s.scheduler);
        if sched.is_done() {
            return Ok(Json(StepView {
                slot_k: sched.slots().len(),
                transmitting_nodes: Vec::new(),
                mis_problem: None,
                done: true,
            }));
        }
        sched.step(solver.as_ref()).map_err(|e| ApiError::internal(e.to_string()))?;
        let trace = sched.trace().last().expect("a slot was just scheduled");
        step_view(&sched, trace).map(Json)
    })
    .await
}

async fn run_field(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<ScheduleView> {
    let s = state.session(&id)?;
    let solver = state.0.solver.clone();
    blocking(move || {
        let mut sched = lock(&s.scheduler);
        let schedule = sched.run(solver.as_ref()).map_err(|e| ApiError::internal(e.to_string()))?;
        validate_schedule(sched.field(), sched.tree(), sched.interference(), &schedule)
            .map_err(|v| ApiError::internal(format!("invalid schedule: {v}")))?;
        Ok(Json(schedule.into()))
    })
    .await
}

async fn reset_field(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult<SessionView> {
    let s = state.session(&id)?;
    let mut sched = lock(&s.scheduler);
    let fresh =
        Scheduler::from_parts(sched.field().clone(), sched.tree().clone(), sched.interference().clone(), s.seed);
    *sched = fresh;
    Ok(Json(session_view(&id, s.seed, &sched)))
}

#[derive(Debug, Serialize)]
pub struct SolverRun {
    pub solver: String,
    pub slots: usize,
    pub elapsed_s: f64,
    pub valid: bool,
    pub schedule: ScheduleView,
}

#[derive(Debug, Serialize)]
pub struct BenchmarkView {
    pub seed: u64,
    pub placement: Placement,
    pub tree: TreeView,
    pub results: Vec<SolverRun>,
}

fn solve_field(field: Field, seed: u64, solver: &dyn MisAlgorithm) -> Result<SolverRun, ApiError> {
    let mut s = Scheduler::new(field, seed).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let schedule = s.run(solver).map_err(|e| ApiError::internal(e.to_string()))?;
    let valid = validate_schedule(s.field(), s.tree(), s.interference(), &schedule).is_ok();
    Ok(SolverRun {
        solver: solver.name().to_string(),
        slots: schedule.total_slots(),
        elapsed_s: schedule.elapsed_s,
        valid,
        schedule: schedule.into(),
    })
}

/// Both solvers on the same field, each in its own worker.
async fn run_benchmark(State(state): State<AppState>, body: Bytes) -> ApiResult<BenchmarkView> {
    let req: FieldRequest = parse_body(&body)?;
    req.condition()?;
    let seed = req.seed;
    let (field, tree) = blocking(move || {
        let f = req.field()?;
        let s = Scheduler::new(f.clone(), seed).map_err(|e| ApiError::bad_request(e.to_string()))?;
        Ok((f, tree_view(&s)))
    })
    .await?;
    let solver = state.0.solver.clone();
    let f1 = field.clone();
    let sb = tokio::task::spawn_blocking(move || solve_field(f1, seed, solver.as_ref()));
    let f2 = field.clone();
    let base = tokio::task::spawn_blocking(move || solve_field(f2, seed, &BaselineSolver));
    let (sb, base) = tokio::join!(sb, base);
    let join = |r: Result<Result<SolverRun, ApiError>, tokio::task::JoinError>| {
        r.map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
    };
    Ok(Json(BenchmarkView { seed, placement: placement(&field), tree, results: vec![join(sb)?, join(base)?] }))
}

//! Batch driver: a job file names an exact sequence, a parameter and the
//! pipeline stages to run; the result is a deterministic JSON report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::arrangement::{build_arrangement, enumerate_faces, genericity_check, ArrangementError, FacePoset};
use crate::beilinson::Flavor;
use crate::cosheaf::{
    build_cosheaf, check_central, check_functoriality, collapse_and_complete, compare_stalks,
    global_algebra, reduce_cosheaf, refine_cells, refine_cells_auto, verify_reduction_commutes,
    working_degree, CellComplex, CosheafError,
};
use crate::lattice::{format_rational, parse_rational, LatticeError, RationalPoint, ToriSequence};
use crate::skeleton::{
    annulus_points, attach_microsheaf_cosheaf, build_skeleton, euler_characteristic, euler_oracle,
    flow_report, local_model_check, FlowParams, FlowReport, SkeletonError,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse job: {0}")]
    Parse(String),
    #[error("invalid job: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Arrange,
    Cosheaf,
    Global,
    Reduce,
    Verify,
    Skeleton,
    Flow,
}

impl Command {
    pub const ORDER: [Command; 7] = [
        Command::Arrange,
        Command::Cosheaf,
        Command::Global,
        Command::Reduce,
        Command::Verify,
        Command::Skeleton,
        Command::Flow,
    ];

    fn needs_arrangement(self) -> bool {
        self != Command::Flow
    }

    fn needs_cells(self) -> bool {
        matches!(self, Command::Global | Command::Verify | Command::Skeleton)
    }

    fn name(self) -> &'static str {
        match self {
            Command::Arrange => "arrange",
            Command::Cosheaf => "cosheaf",
            Command::Global => "global",
            Command::Reduce => "reduce",
            Command::Verify => "verify",
            Command::Skeleton => "skeleton",
            Command::Flow => "flow",
        }
    }
}

/// `"auto"` or a list of rationals.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum CutShift {
    #[default]
    Auto,
    Explicit(Vec<BigRational>),
}

impl CutShift {
    pub fn parse(s: &str) -> Result<CutShift, CliError> {
        if s.trim() == "auto" {
            return Ok(CutShift::Auto);
        }
        s.split(',')
            .map(|x| parse_rational(x.trim()).map_err(|e| CliError::Parse(e.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(CutShift::Explicit)
    }
}

impl Serialize for CutShift {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CutShift::Auto => s.serialize_str("auto"),
            CutShift::Explicit(v) => {
                let items: Vec<String> = v.iter().map(format_rational).collect();
                items.serialize(s)
            }
        }
    }
}

impl<'de> Deserialize<'de> for CutShift {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            List(Vec<String>),
        }
        match Raw::deserialize(d)? {
            Raw::Word(w) => CutShift::parse(&w).map_err(serde::de::Error::custom),
            Raw::List(v) => v
                .iter()
                .map(|x| parse_rational(x).map_err(serde::de::Error::custom))
                .collect::<Result<Vec<_>, _>>()
                .map(CutShift::Explicit),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqSpec {
    pub n: usize,
    /// Columns of `iota`, each of length `n`.
    #[serde(default)]
    pub iota: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowSpec {
    pub epsilon: f64,
    /// Bisected when absent.
    pub c: Option<f64>,
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
    pub r_min: f64,
    pub r_max: f64,
    pub rtol: f64,
    pub max_time: f64,
    pub distance_tol: f64,
}

impl Default for FlowSpec {
    fn default() -> Self {
        FlowSpec {
            epsilon: 0.1,
            c: None,
            grid: 400,
            samples: 100,
            seed: 0,
            r_min: 1.2,
            r_max: 1.9,
            rtol: 1e-9,
            max_time: 1e4,
            distance_tol: 1e-3,
        }
    }
}

impl FlowSpec {
    pub fn params(&self) -> FlowParams {
        let mut p = match self.c {
            Some(c) => FlowParams::new(self.epsilon, c),
            None => FlowParams::admissible(self.epsilon, self.grid),
        };
        p.rtol = self.rtol;
        p.max_time = self.max_time;
        p.distance_tol = self.distance_tol;
        p
    }
}

fn default_degree() -> u32 {
    6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    #[serde(default)]
    pub seq: Option<SeqSpec>,
    #[serde(default)]
    pub beta: Vec<String>,
    #[serde(default = "default_degree")]
    pub degree: u32,
    #[serde(default)]
    pub cut_shift: CutShift,
    pub commands: Vec<Command>,
    #[serde(default)]
    pub flow: Option<FlowSpec>,
}

impl JobSpec {
    pub fn from_json(s: &str) -> Result<JobSpec, CliError> {
        let job: JobSpec = serde_json::from_str(s).map_err(|e| CliError::Parse(e.to_string()))?;
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.commands.is_empty() {
            return Err(CliError::Invalid("no commands".into()));
        }
        if self.degree < 2 {
            return Err(CliError::Invalid(format!("degree {} < 2", self.degree)));
        }
        if self.commands.iter().any(|c| c.needs_arrangement()) && self.seq.is_none() {
            return Err(CliError::Invalid("stages other than flow need seq".into()));
        }
        if let Some(f) = &self.flow {
            if !(f.epsilon > 0.0 && f.epsilon < 0.5) || f.grid == 0 || f.r_min >= f.r_max {
                return Err(CliError::Invalid("flow parameters out of range".into()));
            }
            if f.c.is_some_and(|c| c <= 0.0) || f.rtol <= 0.0 || f.max_time <= 0.0 {
                return Err(CliError::Invalid("flow parameters out of range".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    Failed,
    Error,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageError {
    pub kind: String,
    pub message: String,
    /// The offending object, serialized.
    pub detail: Value,
    /// Bad input rather than a failed computation.
    pub input: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub command: Command,
    pub status: Status,
    pub output: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<StageError>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportBundle {
    pub job: JobSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cut_shift_used: Option<Vec<String>>,
    pub stages: Vec<StageReport>,
    pub passed: bool,
    pub exit_code: i32,
    #[serde(skip)]
    pub flow: Option<FlowReport>,
}

impl ReportBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for st in &self.stages {
            let status = match st.status {
                Status::Passed => "pass",
                Status::Failed => "FAIL",
                Status::Error => "ERROR",
                Status::Skipped => "skipped",
            };
            let _ = write!(s, "{:<9} {status}", st.command.name());
            if let Some(e) = &st.error {
                let _ = write!(s, "  {}: {}", e.kind, e.message);
            } else if let Some(h) = st.output.get("headline").and_then(Value::as_str) {
                let _ = write!(s, "  {h}");
            }
            s.push('\n');
        }
        if let Some(c) = &self.cut_shift_used {
            let _ = writeln!(s, "cut shift {}", c.join(","));
        }
        let _ = writeln!(s, "{}", if self.passed { "PASSED" } else { "FAILED" });
        s
    }
}

fn err(kind: &str, message: String, detail: Value, input: bool) -> StageError {
    StageError {
        kind: kind.into(),
        message,
        detail,
        input,
    }
}

fn arrangement_error(e: ArrangementError, detail: Value) -> StageError {
    match e {
        ArrangementError::NonGeneric(f) => err(
            "NonGenericArrangement",
            format!("{} offending flat(s)", f.len()),
            json!({ "flats": f, "arrangement": detail }),
            true,
        ),
        ArrangementError::Lattice(l @ LatticeError::InvalidSequence(_)) => {
            err("InvalidSequence", l.to_string(), detail, true)
        }
        ArrangementError::Lattice(l) => err("Lattice", l.to_string(), detail, true),
        other => err("Arrangement", other.to_string(), detail, false),
    }
}

fn cosheaf_error(e: CosheafError) -> StageError {
    match e {
        CosheafError::NonTransverseCut { shift, detail } => err(
            "NonTransverseCut",
            detail.clone(),
            json!({ "shift": shift }),
            true,
        ),
        CosheafError::Arrangement(a) => arrangement_error(a, Value::Null),
        other => err("Cosheaf", other.to_string(), Value::Null, false),
    }
}

fn skeleton_error(e: SkeletonError) -> StageError {
    match e {
        SkeletonError::NonGenericArrangement(f) => err(
            "NonGenericArrangement",
            format!("{} offending flat(s)", f.len()),
            json!({ "flats": f }),
            true,
        ),
        SkeletonError::Cosheaf(c) => cosheaf_error(c),
        other => err("Skeleton", other.to_string(), Value::Null, false),
    }
}

fn build_poset(job: &JobSpec) -> Result<(FacePoset, Value), StageError> {
    let spec = job.seq.as_ref().expect("validated");
    let seq = if spec.iota.is_empty() {
        ToriSequence::trivial(spec.n)
    } else {
        ToriSequence::from_columns_i64(spec.n, &spec.iota)
            .map_err(|e| err("InvalidSequence", e.to_string(), json!(spec), true))?
    };
    let report = seq.validate();
    if !report.passed {
        return Err(err(
            "InvalidSequence",
            report.failures.join("; "),
            json!(spec),
            true,
        ));
    }
    let beta = RationalPoint::parse(&job.beta)
        .map_err(|e| err("Parse", e.to_string(), json!(job.beta), true))?;
    let arr = build_arrangement(&seq, &beta).map_err(|e| arrangement_error(e, json!(spec)))?;
    let arr_json = serde_json::to_value(&arr).unwrap_or(Value::Null);
    let gen = genericity_check(&arr);
    if !gen.passed {
        return Err(arrangement_error(ArrangementError::NonGeneric(gen.failures), arr_json));
    }
    let poset = enumerate_faces(&arr).map_err(|e| arrangement_error(e, arr_json.clone()))?;
    Ok((poset, arr_json))
}

fn face_counts(p: &FacePoset) -> Vec<usize> {
    (0..=p.d()).map(|k| p.faces_of_dim(k).len()).collect()
}

fn stage_arrange(p: &FacePoset, arr: &Value) -> (bool, Value) {
    let counts = face_counts(p);
    let euler = p.euler_sum();
    let ok = euler == 0;
    (
        ok,
        json!({
            "headline": format!("faces by dim {counts:?}, euler {euler}"),
            "arrangement": arr,
            "faces_by_dim": counts,
            "chambers": p.chambers().len(),
            "euler_sum": euler,
            "genericity": "passed",
        }),
    )
}

fn stage_cosheaf(p: &FacePoset, degree: u32) -> Result<(bool, Value), StageError> {
    let mut out = BTreeMap::new();
    let mut ok = true;
    for flavor in [Flavor::B0, Flavor::B] {
        let sheaf = build_cosheaf(p, flavor).map_err(cosheaf_error)?;
        let functorial = check_functoriality(&sheaf).is_ok();
        let central = flavor == Flavor::B0 || check_central(&sheaf).is_ok();
        ok &= functorial && central;
        let dims: Vec<Vec<usize>> = sheaf
            .stalks
            .iter()
            .map(|s| s.rewrite.basis(degree).map(|b| b.dims()).unwrap_or_default())
            .collect();
        out.insert(
            format!("{flavor:?}"),
            json!({ "functorial": functorial, "central": central, "stalk_dims": dims }),
        );
    }
    out.insert(
        "headline".into(),
        json!(format!("{} stalks per flavor", p.faces.len())),
    );
    Ok((ok, json!(out)))
}

fn stage_global(p: &FacePoset, cells: &CellComplex, degree: u32) -> Result<(bool, Value), StageError> {
    let mut out = BTreeMap::new();
    let mut head = Vec::new();
    for flavor in [Flavor::B0, Flavor::B] {
        let sheaf = build_cosheaf(p, flavor).map_err(cosheaf_error)?;
        let glued = global_algebra(&sheaf, cells).map_err(cosheaf_error)?;
        let c = collapse_and_complete(glued, working_degree(degree)).map_err(cosheaf_error)?;
        let dims = c
            .dims(degree)
            .map_err(|e| cosheaf_error(CosheafError::from(e)))?;
        head.push(format!("{flavor:?} {dims:?}"));
        out.insert(
            format!("{flavor:?}"),
            json!({
                "vertices": c.collapsed.vertices.len(),
                "generators": c.collapsed.generators.len(),
                "relations": c.collapsed.relations.len(),
                "dims": dims,
                "fully_complete": c.rewrite.fully_complete,
            }),
        );
    }
    out.insert("headline".into(), json!(head.join(", ")));
    Ok((true, json!(out)))
}

fn stage_reduce(p: &FacePoset, degree: u32) -> Result<(bool, Value), StageError> {
    let b = build_cosheaf(p, Flavor::B).map_err(cosheaf_error)?;
    let b0 = build_cosheaf(p, Flavor::B0).map_err(cosheaf_error)?;
    let r = reduce_cosheaf(&b).map_err(cosheaf_error)?;
    let reps = compare_stalks(&b0, &r, degree).map_err(cosheaf_error)?;
    let ok = reps.iter().all(|x| x.isomorphic);
    let per: Vec<Value> = reps
        .iter()
        .map(|x| json!({ "isomorphic": x.isomorphic, "reason": x.reason, "dims": x.dims_source }))
        .collect();
    Ok((
        ok,
        json!({
            "headline": format!("{}/{} stalks reduce to B0", reps.iter().filter(|x| x.isomorphic).count(), reps.len()),
            "stalks": per,
        }),
    ))
}

fn stage_verify(p: &FacePoset, cells: &CellComplex, degree: u32) -> Result<(bool, Value), StageError> {
    let rep = verify_reduction_commutes(p, cells, degree).map_err(cosheaf_error)?;
    let mut v = serde_json::to_value(&rep).unwrap_or(Value::Null);
    v["headline"] = json!(format!("three-way agreement up to degree {degree}: {:?}", rep.dims_b0));
    Ok((rep.passed(), v))
}

fn stage_skeleton(p: &FacePoset, cells: &CellComplex) -> Result<(bool, Value), StageError> {
    let s = build_skeleton(p).map_err(skeleton_error)?;
    let chi = euler_characteristic(&s, cells);
    let oracle = euler_oracle(&p.arrangement);
    let bad_local: Vec<usize> = (0..s.strata.len()).filter(|&i| !local_model_check(&s, i)).collect();
    let (_, dict) = attach_microsheaf_cosheaf(&s).map_err(skeleton_error)?;
    let ok = chi == oracle && bad_local.is_empty() && s.projection_is_poset_map();
    Ok((
        ok,
        json!({
            "headline": format!("{} strata, euler {chi} (oracle {oracle})", s.strata.len()),
            "strata": s.strata,
            "euler_characteristic": chi,
            "euler_oracle": oracle,
            "local_model_failures": bad_local,
            "dictionary": dict,
        }),
    ))
}

fn stage_flow(spec: &FlowSpec) -> Result<(bool, Value, FlowReport), StageError> {
    let params = spec.params();
    let pts = annulus_points(spec.samples, spec.seed, spec.r_min, spec.r_max);
    let rep = flow_report(&params, spec.grid, &pts)
        .map_err(|e| err("StepFailure", e.to_string(), json!(params), false))?;
    let v = json!({
        "headline": format!(
            "c = {:.6}, min F = {:.3e}, {}/{} converged, max distance {:.2e}",
            params.c, rep.area.min_f, rep.converged, rep.trajectories.len(), rep.max_distance
        ),
        "params": params,
        "area": rep.area,
        "converged": rep.converged,
        "samples": rep.trajectories.len(),
        "max_distance": rep.max_distance,
        "all_monotone": rep.all_monotone,
        "trajectories": rep.trajectories,
    });
    Ok((rep.passed(), v, rep))
}

/// Runs the requested stages in dependency order.
pub fn run(job: &JobSpec) -> ReportBundle {
    let mut stages = Vec::new();
    let mut cut_shift_used = None;
    let mut flow = None;
    let requested: Vec<Command> = Command::ORDER
        .into_iter()
        .filter(|c| job.commands.contains(c))
        .collect();

    let mut poset: Option<Result<(FacePoset, Value), StageError>> = None;
    if requested.iter().any(|c| c.needs_arrangement()) {
        poset = Some(build_poset(job));
    }
    let mut cells: Option<Result<CellComplex, StageError>> = None;
    if let Some(Ok((p, _))) = &poset {
        if requested.iter().any(|c| c.needs_cells()) {
            let c = match &job.cut_shift {
                CutShift::Auto => refine_cells_auto(p),
                CutShift::Explicit(v) => {
                    let v = if v.len() == 1 { vec![v[0].clone(); p.d()] } else { v.clone() };
                    if v.len() != p.d() {
                        Err(CosheafError::NonTransverseCut {
                            shift: v.iter().map(format_rational).collect(),
                            detail: format!("cut shift needs {} coordinates", p.d()),
                        })
                    } else {
                        refine_cells(p, &v)
                    }
                }
            }
            .map_err(cosheaf_error);
            if let Ok(c) = &c {
                cut_shift_used = Some(c.shift.iter().map(format_rational).collect());
            }
            cells = Some(c);
        }
    }

    for cmd in requested {
        let result: Result<(bool, Value), StageError> = if cmd == Command::Flow {
            stage_flow(&job.flow.clone().unwrap_or_default()).map(|(ok, v, rep)| {
                flow = Some(rep);
                (ok, v)
            })
        } else {
            match poset.as_ref().expect("built") {
                Err(e) => {
                    if cmd == Command::Arrange {
                        Err(e.clone())
                    } else {
                        stages.push(skipped(cmd, "arrange"));
                        continue;
                    }
                }
                Ok((p, arr)) => {
                    let cells = match (&cells, cmd.needs_cells()) {
                        (Some(Err(e)), true) => {
                            stages.push(StageReport {
                                command: cmd,
                                status: Status::Error,
                                output: Value::Null,
                                error: Some(e.clone()),
                            });
                            continue;
                        }
                        (Some(Ok(c)), true) => Some(c),
                        _ => None,
                    };
                    match cmd {
                        Command::Arrange => Ok(stage_arrange(p, arr)),
                        Command::Cosheaf => stage_cosheaf(p, job.degree),
                        Command::Global => stage_global(p, cells.expect("cells"), job.degree),
                        Command::Reduce => stage_reduce(p, job.degree),
                        Command::Verify => stage_verify(p, cells.expect("cells"), job.degree),
                        Command::Skeleton => stage_skeleton(p, cells.expect("cells")),
                        Command::Flow => unreachable!(),
                    }
                }
            }
        };
        stages.push(match result {
            Ok((ok, output)) => StageReport {
                command: cmd,
                status: if ok { Status::Passed } else { Status::Failed },
                output,
                error: None,
            },
            Err(e) => StageReport {
                command: cmd,
                status: Status::Error,
                output: Value::Null,
                error: Some(e),
            },
        });
    }
    let input_error = stages
        .iter()
        .any(|s| s.error.as_ref().is_some_and(|e| e.input));
    let passed = stages.iter().all(|s| s.status == Status::Passed);
    let exit_code = if input_error {
        2
    } else if passed {
        0
    } else {
        1
    };
    ReportBundle {
        job: job.clone(),
        cut_shift_used,
        stages,
        passed,
        exit_code,
        flow,
    }
}

fn skipped(cmd: Command, dep: &str) -> StageReport {
    StageReport {
        command: cmd,
        status: Status::Skipped,
        output: Value::Null,
        error: Some(err(
            "DependencyFailed",
            format!("{dep} did not succeed"),
            Value::Null,
            false,
        )),
    }
}

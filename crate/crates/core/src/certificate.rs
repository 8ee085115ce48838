//! JSON certificates: a DAG of COMPUTED nodes (replayable from their
//! inputs) and CITED nodes (external results).

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::{invalid, Error, Result};
use crate::finitefield::{FqContext, FqElem, PrimeModulus};
use crate::splitcrit::{
    find_nonsplit_mu, half_configuration, lemma_polynomial, level_split_report_with, DivisorP1, MuChoice, Rounding,
};
use crate::surfcalc::{build_del_pezzo_tower, TowerReport};
use crate::threefold::{
    canonicity_chain, elem_json, fermat_cubic_surface_p2, fpure_check_xn, non_fpure_canonical_data,
    smooth_cubic_check, supersingular_lambda, CanonicityChain, ConeFamily, EvidenceKind, NonFpureData,
};

pub const SCHEMA_VERSION: &str = "1.0";
pub const TOOL: &str = "frobsplit";

/// The JSON schema every certificate validates against.
pub const SCHEMA: &str = include_str!("../schema/certificate.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeKind {
    Computed,
    Cited,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeData {
    pub op: String,
    pub inputs: Value,
    pub outputs: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub statement: String,
    pub data: NodeData,
    pub depends_on: Vec<String>,
    pub paper_ref: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldModulus {
    pub p: u64,
    pub degree: usize,
    /// Monic modulus, low-to-high.
    pub modulus: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub p: u64,
    pub parameters: Value,
    pub timestamp: String,
    pub moduli: Vec<FieldModulus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: String,
    pub meta: Meta,
    pub nodes: Vec<Node>,
}

impl Certificate {
    pub fn computed(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Computed)
    }

    pub fn cited(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Cited)
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// The certificate with the timestamp blanked, for comparisons.
    pub fn body(&self) -> Certificate {
        let mut c = self.clone();
        c.meta.timestamp.clear();
        c
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Structural problems: duplicate or dangling ids, cycles, CITED nodes without
/// a reference, no COMPUTED node at all.
pub fn structural_problems(cert: &Certificate) -> Vec<String> {
    let mut problems = Vec::new();
    let mut ids = HashSet::new();
    for n in &cert.nodes {
        if !ids.insert(n.id.as_str()) {
            problems.push(format!("duplicate id {}", n.id));
        }
        if n.kind == NodeKind::Cited && n.paper_ref.as_deref().is_none_or(str::is_empty) {
            problems.push(format!("cited node {} has no reference", n.id));
        }
    }
    for n in &cert.nodes {
        for d in &n.depends_on {
            if !ids.contains(d.as_str()) {
                problems.push(format!("{} depends on unknown {d}", n.id));
            }
        }
    }
    // Kahn's algorithm
    let mut indeg: HashMap<&str, usize> = cert.nodes.iter().map(|n| (n.id.as_str(), 0)).collect();
    let mut users: HashMap<&str, Vec<&str>> = HashMap::new();
    for n in &cert.nodes {
        for d in &n.depends_on {
            if ids.contains(d.as_str()) {
                *indeg.get_mut(n.id.as_str()).expect("known") += 1;
                users.entry(d.as_str()).or_default().push(n.id.as_str());
            }
        }
    }
    let mut ready: Vec<&str> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&k, _)| k).collect();
    let mut seen = 0;
    while let Some(id) = ready.pop() {
        seen += 1;
        for &u in users.get(id).into_iter().flatten() {
            let d = indeg.get_mut(u).expect("known");
            *d -= 1;
            if *d == 0 {
                ready.push(u);
            }
        }
    }
    if seen < indeg.len() {
        problems.push("depends_on has a cycle".into());
    }
    if cert.computed().next().is_none() {
        problems.push("no COMPUTED node".into());
    }
    problems
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub id: String,
    pub op: String,
    pub identical: bool,
    pub holds: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub structural: Vec<String>,
    pub replay: Vec<ReplayOutcome>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.structural.is_empty() && self.replay.iter().all(|r| r.identical && r.holds && r.error.is_none())
    }
}

/// Check structure and rerun every COMPUTED node, comparing serialized outputs.
pub fn verify(cert: &Certificate, cfg: &Config) -> VerifyReport {
    let mut ctx = Replay::new(cfg);
    let replay = cert
        .computed()
        .map(|n| match ctx.run(&n.data.op, &n.data.inputs) {
            Ok(out) => ReplayOutcome {
                id: n.id.clone(),
                op: n.data.op.clone(),
                identical: canonical(&out) == canonical(&n.data.outputs),
                holds: out["holds"] == json!(true),
                error: None,
            },
            Err(e) => ReplayOutcome {
                id: n.id.clone(),
                op: n.data.op.clone(),
                identical: false,
                holds: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    VerifyReport {
        structural: structural_problems(cert),
        replay,
    }
}

fn canonical(v: &Value) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn field_of(p: u64, modulus: &Value) -> Result<std::sync::Arc<FqContext>> {
    let pm = PrimeModulus::new(p)?;
    let m: Vec<u64> = serde_json::from_value(modulus.clone()).map_err(|e| invalid(e.to_string()))?;
    if m.len() <= 2 {
        Ok(FqContext::prime(pm))
    } else {
        FqContext::with_modulus(pm, &m)
    }
}

/// Inverse of [`elem_json`].
pub fn elem_from_json(ctx: &std::sync::Arc<FqContext>, v: &Value) -> Result<FqElem> {
    match v {
        Value::Number(n) => {
            let c = n.as_u64().ok_or_else(|| invalid(format!("bad element {v}")))?;
            Ok(ctx.embed_prime(c))
        }
        Value::Array(_) => {
            let coeffs: Vec<u64> = serde_json::from_value(v.clone()).map_err(|e| invalid(e.to_string()))?;
            if coeffs.len() > ctx.degree() || coeffs.iter().any(|&c| c >= ctx.p()) {
                return Err(invalid(format!("bad element {v}")));
            }
            Ok(ctx.element(&coeffs))
        }
        _ => Err(invalid(format!("bad element {v}"))),
    }
}

fn u64_in(inputs: &Value, key: &str) -> Result<u64> {
    inputs[key]
        .as_u64()
        .ok_or_else(|| invalid(format!("input {key} missing or not an integer")))
}

fn str_in<'a>(inputs: &'a Value, key: &str) -> Result<&'a str> {
    inputs[key]
        .as_str()
        .ok_or_else(|| invalid(format!("input {key} missing or not a string")))
}

/// Replays COMPUTED operations; tower reports are cached by `n`.
struct Replay<'a> {
    cfg: &'a Config,
    towers: BTreeMap<i64, TowerReport>,
    chains: BTreeMap<String, CanonicityChain>,
}

impl<'a> Replay<'a> {
    fn new(cfg: &'a Config) -> Self {
        Replay {
            cfg,
            towers: BTreeMap::new(),
            chains: BTreeMap::new(),
        }
    }

    fn tower(&mut self, n: i64) -> Result<&TowerReport> {
        if let std::collections::btree_map::Entry::Vacant(slot) = self.towers.entry(n) {
            slot.insert(build_del_pezzo_tower(n)?);
        }
        Ok(&self.towers[&n])
    }

    fn chain(&mut self, family: &Value) -> Result<&CanonicityChain> {
        let key = canonical(family);
        if !self.chains.contains_key(&key) {
            let fam = ConeFamily::from_parameters(family)?;
            self.chains.insert(key.clone(), canonicity_chain(&fam, self.cfg)?);
        }
        Ok(&self.chains[&key])
    }

    fn run(&mut self, op: &str, inputs: &Value) -> Result<Value> {
        let cfg = self.cfg;
        match op {
            "mu_search" => {
                let p = PrimeModulus::new(u64_in(inputs, "p")?)?;
                match find_nonsplit_mu(p, cfg)? {
                    MuChoice::Any => Ok(json!({ "mu": "any", "holds": true })),
                    MuChoice::Found(mu) => {
                        let value = lemma_polynomial(p)?.lift(mu.ctx())?.eval(&mu)?;
                        Ok(json!({
                            "mu": elem_json(&mu),
                            "modulus": mu.ctx().modulus(),
                            "lemma_polynomial_at_mu": elem_json(&value),
                            "holds": value.is_zero() && !mu.is_zero() && !mu.is_one(),
                        }))
                    }
                }
            }
            "mu_root" => {
                let p = u64_in(inputs, "p")?;
                let k = field_of(p, &inputs["modulus"])?;
                let mu = elem_from_json(&k, &inputs["mu"])?;
                let value = lemma_polynomial(PrimeModulus::new(p)?)?.lift(&k)?.eval(&mu)?;
                Ok(json!({
                    "lemma_polynomial_at_mu": elem_json(&value),
                    "holds": value.is_zero() && !mu.is_zero() && !mu.is_one(),
                }))
            }
            "level_split" => {
                let p = PrimeModulus::new(u64_in(inputs, "p")?)?;
                let e = u64_in(inputs, "e")? as u32;
                let d = DivisorP1::parse(p, str_in(inputs, "divisor")?, cfg)?;
                let rounding = match str_in(inputs, "rounding")? {
                    "floor" => Rounding::Floor,
                    "ceil" => Rounding::Ceil,
                    other => return Err(invalid(format!("unknown rounding {other}"))),
                };
                let expect = inputs["expect_split"]
                    .as_bool()
                    .ok_or_else(|| invalid("input expect_split missing"))?;
                let report = level_split_report_with(p, e, &d, rounding, cfg)?;
                Ok(json!({ "split": report.split, "report": report, "holds": report.split == expect }))
            }
            "tower_check" => {
                let n = inputs["n"].as_i64().ok_or_else(|| invalid("input n missing"))?;
                let name = str_in(inputs, "check")?.to_string();
                let report = self.tower(n)?;
                let c = report
                    .checks
                    .iter()
                    .find(|c| c.name == name)
                    .ok_or_else(|| invalid(format!("unknown tower check {name}")))?;
                Ok(json!({ "passed": c.passed, "detail": c.detail, "holds": c.passed }))
            }
            "tower_value" => {
                let n = inputs["n"].as_i64().ok_or_else(|| invalid("input n missing"))?;
                let field = str_in(inputs, "quantity")?.to_string();
                let v = serde_json::to_value(self.tower(n)?).expect("serializable");
                let value = v
                    .get(&field)
                    .cloned()
                    .ok_or_else(|| invalid(format!("unknown tower quantity {field}")))?;
                Ok(json!({ "value": value, "holds": true }))
            }
            "cartier_index_prime_to_p" => {
                let n = inputs["n"].as_i64().ok_or_else(|| invalid("input n missing"))?;
                let p = u64_in(inputs, "p")?;
                let index = self.tower(n)?.cartier_index_kz_cz;
                Ok(json!({ "index": index, "holds": index % p != 0 }))
            }
            "fermat_cubic_p2" => {
                let r = fermat_cubic_surface_p2(cfg)?;
                let holds = r.smooth && !r.cone_fpure;
                Ok(json!({ "report": r, "holds": holds }))
            }
            "fedder_e8" => {
                let p = PrimeModulus::new(u64_in(inputs, "p")?)?;
                let f = crate::threefold::e8_equation(p);
                let fpure = crate::splitcrit::fedder_hypersurface(p, &f, cfg)?;
                Ok(json!({ "equation": f.to_string(), "fpure": fpure, "holds": !fpure }))
            }
            "supersingular_lambda" => {
                let p = PrimeModulus::new(u64_in(inputs, "p")?)?;
                let lambda = supersingular_lambda(p, cfg)?;
                let hasse = crate::splitcrit::hasse_invariant(p, &crate::splitcrit::legendre_cubic(&lambda), cfg)?;
                Ok(json!({
                    "lambda": elem_json(&lambda),
                    "modulus": lambda.ctx().modulus(),
                    "hasse_invariant": elem_json(&hasse),
                    "holds": hasse.is_zero(),
                }))
            }
            "smooth_cubic" => {
                let fam = ConeFamily::from_parameters(&inputs["family"])?;
                let r = smooth_cubic_check(&fam, cfg)?;
                let holds = r.smooth;
                Ok(json!({ "report": r, "holds": holds }))
            }
            "canonicity_chain" => {
                let chain = self.chain(&inputs["family"])?;
                Ok(json!({
                    "verdicts": chain.verdicts(),
                    "holds": chain.computed_evidence_holds(),
                }))
            }
            "chain_evidence" => {
                let step_n = u64_in(inputs, "step")?;
                let label = str_in(inputs, "label")?;
                let chain = self.chain(&inputs["family"])?;
                let ev = chain
                    .steps
                    .iter()
                    .filter(|s| s.n == step_n)
                    .flat_map(|s| &s.evidence)
                    .find(|e| e.label == label && e.kind == EvidenceKind::Computed)
                    .ok_or_else(|| invalid(format!("no evidence {label} at n = {step_n}")))?;
                Ok(json!({ "data": ev.data, "holds": ev.holds == Some(true) }))
            }
            "fpure_xn" => {
                let fam = ConeFamily::from_parameters(&inputs["family"])?;
                let r = fpure_check_xn(&fam, cfg)?;
                let holds = !r.fpure && r.reduction_agrees != Some(false);
                Ok(json!({ "report": r, "holds": holds }))
            }
            other => Err(invalid(format!("unknown op {other}"))),
        }
    }
}

/// Accumulates nodes, running every COMPUTED node through the replay engine
/// so recorded outputs are exactly what verification recomputes.
struct Builder<'a> {
    replay: Replay<'a>,
    nodes: Vec<Node>,
}

impl<'a> Builder<'a> {
    fn new(cfg: &'a Config) -> Self {
        Builder {
            replay: Replay::new(cfg),
            nodes: Vec::new(),
        }
    }

    fn computed(&mut self, id: &str, statement: &str, op: &str, inputs: Value, deps: &[&str]) -> Result<Value> {
        let outputs = self.replay.run(op, &inputs)?;
        if outputs["holds"] != json!(true) {
            return Err(Error::IdentityFailed(format!("{id}: {statement}")));
        }
        self.nodes.push(Node {
            id: id.into(),
            kind: NodeKind::Computed,
            statement: statement.into(),
            data: NodeData {
                op: op.into(),
                inputs,
                outputs: outputs.clone(),
            },
            depends_on: deps.iter().map(|s| s.to_string()).collect(),
            paper_ref: None,
        });
        Ok(outputs)
    }

    fn cited(&mut self, id: &str, statement: &str, reference: &str, deps: &[&str]) {
        self.nodes.push(Node {
            id: id.into(),
            kind: NodeKind::Cited,
            statement: statement.into(),
            data: NodeData {
                op: "cited".into(),
                inputs: Value::Null,
                outputs: Value::Null,
            },
            depends_on: deps.iter().map(|s| s.to_string()).collect(),
            paper_ref: Some(reference.into()),
        });
    }

    fn finish(self, command: &str, p: u64, parameters: Value, moduli: Vec<FieldModulus>) -> Certificate {
        Certificate {
            schema_version: SCHEMA_VERSION.into(),
            meta: Meta {
                tool: TOOL.into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                p,
                parameters,
                timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                moduli,
            },
            nodes: self.nodes,
        }
    }
}

fn modulus_of(ctx: &FqContext) -> FieldModulus {
    FieldModulus {
        p: ctx.p(),
        degree: ctx.degree(),
        modulus: ctx.modulus().to_vec(),
    }
}

const REF_WATANABE: &str = "Watanabe, F-regular and F-pure normal graded rings (1991), Thm 4.2(h)";
const REF_PUSH: &str = "lemma: global F-splitting descends along birational morphisms (restriction to a big open set)";
const REF_PULL: &str = "Hacon-Xu, On the three dimensional minimal model program in positive characteristic, Prop 2.11";
const REF_ADJUNCTION: &str =
    "lemma: (Z, C) plt with (C, Diff_C) not globally F-split and Cartier index of K_Z + C prime to p implies (Z, C) not globally F-split";
const REF_THRESHOLD: &str = "theorem: (X, Δ + fst(X, Δ; D) D) is globally F-split";
const REF_CONSTRUCTION: &str =
    "construction: blow-ups of P^1 x P^1 at the four fibre corners and along C, contracted to plt (Z, C_Z) and klt X";

/// Certificate that a klt del Pezzo surface over `F_p` is not globally F-split.
pub fn delpezzo_certificate(p: PrimeModulus, n: i64, mu: Option<FqElem>, cfg: &Config) -> Result<Certificate> {
    let pv = p.get();
    let mut b = Builder::new(cfg);
    if pv == 2 {
        b.cited(
            "p2_any_points",
            "for p = 2, (P^1, 1/2 ΣQ_i) is not globally F-split for any four distinct points",
            REF_WATANABE,
            &[],
        );
        for e in 1..=3u64 {
            b.computed(
                &format!("p2_sharp_level_{e}"),
                &format!("the ceiling test on 1/2(inf + 0 + 1 + t) over F_4 fails at level {e}"),
                "level_split",
                json!({ "p": 2, "e": e, "divisor": "1/2@inf,1/2@0,1/2@1,1/2@ext:0,1", "rounding": "ceil", "expect_split": false }),
                &[],
            )?;
        }
        b.computed(
            "fermat_cubic",
            "x^3 + y^3 + z^3 + w^3 is smooth over F_4 and its cone fails Fedder's criterion at p = 2",
            "fermat_cubic_p2",
            json!({}),
            &[],
        )?;
        b.cited(
            "fermat_not_gfs",
            "the Fermat cubic surface in characteristic 2 is a smooth del Pezzo surface that is not globally F-split",
            "Hara, A characteristic p analog of multiplier ideals and applications (1998), Ex 5.5",
            &["fermat_cubic"],
        );
        b.cited(
            "conclusion",
            "X klt del Pezzo, not globally F-split",
            "assembled from the Fermat-cubic branch for p = 2",
            &["fermat_not_gfs", "p2_any_points"],
        );
        let k4 = FqContext::extension(p, 2)?;
        return Ok(b.finish(
            "delpezzo",
            pv,
            json!({ "n": n, "branch": "fermat" }),
            vec![modulus_of(&FqContext::prime(p)), modulus_of(&k4)],
        ));
    }

    let (mu, mu_node) = match mu {
        Some(mu) => {
            if mu.ctx().p() != pv {
                return Err(Error::ContextMismatch(mu.ctx().describe(), format!("F_{pv}")));
            }
            b.computed(
                "mu",
                &format!("μ = {mu} is a root of Σ C(n,i)^2 μ^i outside {{0, 1}}"),
                "mu_root",
                json!({ "p": pv, "mu": elem_json(&mu), "modulus": mu.ctx().modulus() }),
                &[],
            )?;
            (mu, "mu")
        }
        None => {
            let out = b.computed(
                "mu",
                "a root μ ∉ {0, 1} of Σ C(n,i)^2 μ^i exists in F_{p^2}",
                "mu_search",
                json!({ "p": pv }),
                &[],
            )?;
            let k = field_of(pv, &out["modulus"])?;
            (elem_from_json(&k, &out["mu"])?, "mu")
        }
    };
    let divisor = half_configuration(&mu)?.to_string();
    for e in 1..=2u64 {
        b.computed(
            &format!("nonsplit_level_{e}"),
            &format!("(P^1, {divisor}) fails the level-{e} splitting test"),
            "level_split",
            json!({ "p": pv, "e": e, "divisor": divisor, "rounding": "floor", "expect_split": false }),
            &[mu_node],
        )?;
    }
    b.cited(
        "p1_not_gfs",
        &format!("(P^1, {divisor}) is not globally F-split"),
        REF_WATANABE,
        &["nonsplit_level_1"],
    );

    let tower = build_del_pezzo_tower(n)?;
    b.cited(
        "tower_construction",
        "the blow-up/contraction tower P^1 x P^1 ← S ← S_bar → Y → Z, Y → X exists with C_Y a smooth rational curve",
        REF_CONSTRUCTION,
        &[],
    );
    let mut check_ids = Vec::new();
    for (i, c) in tower.checks.iter().enumerate() {
        let id = format!("tower_check_{:02}", i + 1);
        b.computed(
            &id,
            &c.name,
            "tower_check",
            json!({ "n": n, "check": c.name }),
            &["tower_construction"],
        )?;
        check_ids.push(id);
    }
    let values = [
        ("cy_squared", "C_Y^2 = 7/2 - n"),
        ("ey_squared", "E_Y^2 (computed, no closed form asserted)"),
        ("cy_dot_ey", "C_Y · E_Y"),
        ("a", "g^*C_Z = C_Y + a E_Y"),
        ("b", "K_Y + b C_Y = f^*K_X"),
        ("one_minus_b", "1 - b"),
        ("b_bound", "2/(n - 7/2)"),
        ("minus_kc_dot_cy", "-(K_Y + C_Y)·C_Y"),
        ("cz_squared", "C_Z^2"),
        ("ex_squared", "E_X^2"),
        ("different", "Diff_{C_Z} = 1/2 ΣQ_i"),
        ("cartier_index_kz_cz", "Cartier index of K_Z + C_Z"),
        ("positivity", "positivity of C_Z, f_*E_Y and -K_X against tracked curves"),
        ("ranks", "Picard ranks along the tower"),
    ];
    for (q, statement) in values {
        b.computed(
            &format!("value_{q}"),
            statement,
            "tower_value",
            json!({ "n": n, "quantity": q }),
            &["tower_construction"],
        )?;
    }
    b.computed(
        "cartier_prime_to_p",
        &format!("the Cartier index 2 of K_Z + C_Z is prime to p = {pv}"),
        "cartier_index_prime_to_p",
        json!({ "n": n, "p": pv }),
        &["value_cartier_index_kz_cz"],
    )?;
    let check_refs: Vec<&str> = check_ids.iter().map(String::as_str).collect();
    let mut adj_deps = vec!["p1_not_gfs", "cartier_prime_to_p", "value_different"];
    adj_deps.extend(check_refs.iter().copied());
    b.cited(
        "z_not_gfs",
        "(Z, C_Z) is not globally F-split",
        REF_ADJUNCTION,
        &adj_deps,
    );
    b.cited(
        "beta",
        "there is a rational 0 < β < 1 with (Z, β C_Z) not globally F-split",
        REF_THRESHOLD,
        &["z_not_gfs"],
    );
    b.cited(
        "y_not_gfs",
        "(Y, β C_Y) and hence (Y, b C_Y) are not globally F-split once b > β",
        REF_PUSH,
        &["beta", "value_one_minus_b"],
    );
    b.cited(
        "x_not_gfs",
        "X is not globally F-split since f^*K_X = K_Y + b C_Y",
        REF_PULL,
        &["y_not_gfs", "value_b"],
    );
    b.cited(
        "conclusion",
        "X klt del Pezzo, not globally F-split",
        "assembled from the tower, adjunction and transfer nodes",
        &["x_not_gfs", "value_positivity"],
    );
    let mut moduli = vec![modulus_of(&FqContext::prime(p))];
    if mu.ctx().degree() > 1 {
        moduli.push(modulus_of(mu.ctx()));
    }
    Ok(b.finish(
        "delpezzo",
        pv,
        json!({ "n": n, "mu": elem_json(&mu), "branch": "tower" }),
        moduli,
    ))
}

/// Certificate that a canonical threefold singularity over `F_p` is not F-pure.
pub fn threefold_certificate(p: PrimeModulus, cfg: &Config) -> Result<Certificate> {
    let pv = p.get();
    let mut b = Builder::new(cfg);
    match non_fpure_canonical_data(p, cfg)? {
        NonFpureData::SmallPrime { equation, .. } => {
            b.computed(
                "fedder_e8",
                &format!("Fedder(({equation})^{}) = 0 mod (x^{pv}, y^{pv}, z^{pv}, w^{pv})", pv - 1),
                "fedder_e8",
                json!({ "p": pv }),
                &[],
            )?;
            b.cited(
                "e8_canonical",
                "x^2 + y^3 + z^5 defines a canonical threefold singularity (E_8 times a line)",
                "Hara, Classification of two-dimensional F-regular and F-pure singularities (1998), (4.4)",
                &[],
            );
            b.cited(
                "conclusion",
                "X canonical, not F-pure",
                "assembled from the E_8 branch for p <= 5",
                &["fedder_e8", "e8_canonical"],
            );
            Ok(b.finish(
                "threefold",
                pv,
                json!({ "branch": "e8", "equation": equation.to_string() }),
                vec![modulus_of(&FqContext::prime(p))],
            ))
        }
        NonFpureData::Supersingular { family, chain, .. } => {
            b.computed(
                "lambda",
                "a supersingular Legendre parameter λ with vanishing Hasse invariant",
                "supersingular_lambda",
                json!({ "p": pv }),
                &[],
            )?;
            let fam = family.parameters();
            b.computed(
                "smooth_cubic",
                "the Legendre cubic is smooth",
                "smooth_cubic",
                json!({ "family": fam }),
                &["lambda"],
            )?;
            let mut step_ids = Vec::new();
            for step in &chain.steps {
                let mut ev_ids = Vec::new();
                for ev in &step.evidence {
                    let id = format!("n{}_{}", step.n, ev.label);
                    match ev.kind {
                        EvidenceKind::Computed => {
                            b.computed(
                                &id,
                                &ev.statement,
                                "chain_evidence",
                                json!({ "family": fam, "step": step.n, "label": ev.label }),
                                &["smooth_cubic"],
                            )?;
                        }
                        EvidenceKind::Cited => {
                            b.cited(&id, &ev.statement, ev.reference.as_deref().unwrap_or("cited"), &[]);
                        }
                    }
                    ev_ids.push(id);
                }
                step_ids.push((step.n, step.verdict, ev_ids));
            }
            b.computed(
                "chain",
                &format!("canonicity chain {:?}", chain.verdicts()),
                "canonicity_chain",
                json!({ "family": fam }),
                &["smooth_cubic"],
            )?;
            let mut canon_deps: Vec<String> = vec!["chain".into()];
            for (_, _, ids) in &step_ids {
                canon_deps.extend(ids.iter().cloned());
            }
            let deps: Vec<&str> = canon_deps.iter().map(String::as_str).collect();
            b.cited(
                "canonical",
                &format!("X_{pv} is canonical: crepant blow-ups reduce to a smooth or terminal base case"),
                "lemma: X_n = {f + w^n = 0} is canonical for a smooth plane cubic f and p > 5",
                &deps,
            );
            b.computed(
                "not_fpure",
                &format!("(f + w^{pv})^{} ∈ (x^{pv}, y^{pv}, z^{pv}, w^{pv}), agreeing with the test on f alone", pv - 1),
                "fpure_xn",
                json!({ "family": fam }),
                &["lambda"],
            )?;
            b.cited(
                "conclusion",
                "X canonical, not F-pure",
                "assembled from the canonicity chain and Fedder's criterion",
                &["canonical", "not_fpure"],
            );
            let mut moduli = vec![modulus_of(&FqContext::prime(p))];
            if family.field().degree() > 1 {
                moduli.push(modulus_of(family.field()));
            }
            Ok(b.finish("threefold", pv, json!({ "branch": "supersingular", "family": fam }), moduli))
        }
    }
}

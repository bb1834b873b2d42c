use rayon::prelude::*;
use serde_json::{json, Value};
use symrel::exactnum::format_rational;
use symrel::families::{family_power_sum_expansion, Family};
use symrel::partitions::equation_count;
use symrel::relations::{
    extract_y_basis, extract_z, render_y_entry, render_z_entries, verify_conjecture1, verify_conjecture2, PolySource,
    RelationConfig, RelationReport, Verdict,
};
use symrel::solver::{
    bernoulli_free_values, c_name, reconstruct_s_bar, solve_c_coefficients, verify_bernoulli_identity,
    verify_nonlinear_bernoulli,
};
use symrel::{exponent_vectors, partition_count, ExponentVector, PowerSumExpansion};

use crate::args::{BernoulliArgs, GlobalOpts, IndexRange, SolveCArgs, TableArgs, TableKind, VerifyArgs};
use crate::report::{CliError, Report, Status};

const MAX_N: usize = 8;
const MAX_M: usize = 4;

pub fn relation_config(g: &GlobalOpts) -> RelationConfig {
    RelationConfig {
        prescreen_points: g.prescreen,
        term_cap: g.term_cap,
        seed: g.seed,
        ..RelationConfig::default()
    }
}

fn check_bounds(g: &GlobalOpts, what: &str, n: usize, m: usize) -> Result<(), CliError> {
    if !g.allow_large && (n > MAX_N || m > MAX_M) {
        return Err(CliError::Usage(format!(
            "{what} with n = {n}, m = {m} is past the default bounds n <= {MAX_N}, m <= {MAX_M}; pass --allow-large"
        )));
    }
    Ok(())
}

fn key_json(k: &ExponentVector) -> Value {
    json!(k.entries())
}

fn expansion_json<C: symrel::symmfunc::ExpansionCoeff>(e: &PowerSumExpansion<C>) -> Value {
    Value::Array(
        e.entries()
            .iter()
            .map(|(k, c)| json!({ "key": key_json(k), "coeff": c.render() }))
            .collect(),
    )
}

struct Case {
    source: PolySource,
    n: usize,
    m: usize,
}

pub fn verify(g: &GlobalOpts, args: &VerifyArgs) -> Result<Report, CliError> {
    let cases = verify_cases(args)?;
    for c in &cases {
        check_bounds(g, "verify", c.n, c.m)?;
    }
    if cases.is_empty() {
        return Err(CliError::Usage("no (n, m) case matches the given ranges".into()));
    }
    let cfg = relation_config(g);
    let reports: Vec<RelationReport> = cases
        .par_iter()
        .map(|c| {
            if c.n < c.m {
                verify_conjecture1(&c.source, c.n, c.m, &cfg)
            } else {
                verify_conjecture2(&c.source, c.n, c.m, &cfg)
            }
        })
        .collect::<Result<_, _>>()?;

    let mut text = Vec::new();
    let mut rows = Vec::new();
    let mut counts = [0usize; 3];
    let mut status = Status::Ok;
    for r in &reports {
        counts[match r.verdict {
            Verdict::Verified => 0,
            Verdict::Falsified => 1,
            Verdict::ResourceLimited => 2,
        }] += 1;
        status = status.max(Status::from_verdict(r.verdict));
        text.push(format!(
            "{} {} n={} m={}: {}",
            r.conjecture, r.source, r.n, r.m, r.verdict
        ));
        if let Some(e) = &r.extracted {
            text.push(format!("  U = {}", e.render()));
        }
        if let Some(w) = &r.witness {
            text.push(format!("  witness: {w}"));
        }
        let mut row = json!({
            "relation": r.conjecture,
            "source": r.source,
            "n": r.n,
            "m": r.m,
            "verdict": r.verdict,
            "witness": r.witness,
            "extracted": r.extracted.as_ref().map(expansion_json),
        });
        if args.timings {
            row["stages"] = serde_json::to_value(&r.stages).expect("stage costs serialize");
        }
        rows.push(row);
    }
    text.push(format!(
        "{} case{}: {} verified, {} falsified, {} resource-limited",
        reports.len(),
        if reports.len() == 1 { "" } else { "s" },
        counts[0],
        counts[1],
        counts[2]
    ));
    let json = json!({
        "command": "verify",
        "conjecture": args.conjecture,
        "cases": rows,
        "summary": { "verified": counts[0], "falsified": counts[1], "resource_limited": counts[2] },
    });
    Ok(Report { text, json, status })
}

fn verify_cases(args: &VerifyArgs) -> Result<Vec<Case>, CliError> {
    let ns = |m: usize| -> Vec<usize> {
        match (&args.n, args.conjecture) {
            (Some(IndexRange(r)), _) => r.clone().collect(),
            (None, 1) => (0..m).collect(),
            (None, 2) => (m..=MAX_N.max(m)).collect(),
            (None, _) => (1..=MAX_N).collect(),
        }
    };
    let mut cases = Vec::new();
    match args.conjecture {
        1 | 2 => {
            let source: PolySource = args
                .family
                .parse()
                .map_err(|e: symrel::families::UnknownFamily| CliError::Usage(e.to_string()))?;
            if args.key.is_some() {
                return Err(CliError::Usage("--key applies to relation 3 only".into()));
            }
            for m in args.m.0.clone() {
                for n in ns(m) {
                    let ok = if args.conjecture == 1 { n < m } else { n >= m && m >= 1 };
                    if !ok {
                        let need = if args.conjecture == 1 {
                            "n <= m - 1"
                        } else {
                            "n >= m >= 1"
                        };
                        return Err(CliError::Usage(format!(
                            "relation {} needs {need}, got n = {n}, m = {m}",
                            args.conjecture
                        )));
                    }
                    cases.push(Case {
                        source: source.clone(),
                        n,
                        m,
                    });
                }
            }
        }
        _ => {
            if let Some(k) = &args.key {
                if let Some(IndexRange(r)) = &args.n {
                    if !r.contains(&k.0.weight()) {
                        return Err(CliError::Usage(format!("key {} does not have a weight in --n", k.0)));
                    }
                }
            }
            for m in args.m.0.clone() {
                if m == 0 {
                    return Err(CliError::Usage("m must be at least 1".into()));
                }
                for n in ns(m) {
                    let keys = match &args.key {
                        Some(k) if k.0.weight() == n => vec![k.0.clone()],
                        Some(_) => continue,
                        None => exponent_vectors(n, n),
                    };
                    cases.extend(keys.iter().map(|k| Case {
                        source: PolySource::basis(k),
                        n,
                        m,
                    }));
                }
            }
        }
    }
    Ok(cases)
}

pub fn table(g: &GlobalOpts, args: &TableArgs) -> Result<Report, CliError> {
    let cfg = relation_config(g);
    match args.table {
        TableKind::Z => {
            if args.key.is_some() {
                return Err(CliError::Usage("--key applies to Y tables only".into()));
            }
            check_bounds(g, "table Z (family degree n + m)", args.n + args.m, args.m)?;
            let z = extract_z(args.n, args.m, &cfg)?;
            let json = json!({ "table": "Z", "n": args.n, "m": args.m, "entries": expansion_json(&z) });
            Ok(Report {
                text: render_z_entries(args.m, &z),
                json,
                status: Status::Ok,
            })
        }
        TableKind::Y => {
            let (n, m) = (args.n, args.m);
            check_bounds(g, "table Y", n, m)?;
            if n < m || m < 2 {
                return Err(CliError::Usage(format!(
                    "Y tables need n >= m >= 2, got n = {n}, m = {m}"
                )));
            }
            let keys = match &args.key {
                Some(k) if k.0.weight() != n => {
                    return Err(CliError::Usage(format!(
                        "key {} has weight {}, not n = {n}",
                        k.0,
                        k.0.weight()
                    )))
                }
                Some(k) => vec![k.0.clone()],
                None => exponent_vectors(n, n),
            };
            let ys: Vec<PowerSumExpansion> = keys
                .par_iter()
                .map(|k| extract_y_basis(n, m, k, &cfg))
                .collect::<Result<_, _>>()?;
            let text = keys.iter().zip(&ys).map(|(k, y)| render_y_entry(n, m, k, y)).collect();
            let tables: Vec<Value> = keys
                .iter()
                .zip(&ys)
                .map(|(k, y)| json!({ "table": "Y", "n": n, "m": m, "k": key_json(k), "entries": expansion_json(y) }))
                .collect();
            let json = match tables.len() {
                1 if args.key.is_some() => tables.into_iter().next().expect("one table"),
                _ => Value::Array(tables),
            };
            Ok(Report {
                text,
                json,
                status: Status::Ok,
            })
        }
    }
}

pub fn solve_c(g: &GlobalOpts, args: &SolveCArgs) -> Result<Report, CliError> {
    let ns: Vec<usize> = args.n.0.clone().collect();
    for &n in &ns {
        if n < 2 {
            return Err(CliError::Usage(format!("solve-c needs n >= 2, got {n}")));
        }
        check_bounds(g, "solve-c", n, 0)?;
    }
    let cfg = relation_config(g);
    let solutions = ns
        .par_iter()
        .map(|&n| solve_c_coefficients(n, &cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let mut text = Vec::new();
    let mut docs = Vec::new();
    let mut status = Status::Ok;
    for s in &solutions {
        let n = s.n;
        if !text.is_empty() {
            text.push(String::new());
        }
        text.push(format!(
            "n = {n}: {} equations, P({n}) = {} unknowns, rank {}, nullspace dimension {}",
            s.equations,
            s.unknowns,
            s.rank,
            s.nullspace_dim()
        ));
        let free: Vec<String> = s.free_keys.iter().map(|k| c_name(n, k)).collect();
        text.push(format!("free: {}", free.join(", ")));
        let relations = s.relation_lines();
        text.extend(relations.iter().cloned());
        let mut doc = json!({
            "n": n,
            "equations": s.equations,
            "expected_equations": equation_count(n),
            "unknowns": s.unknowns,
            "partitions": partition_count(n, n),
            "rank": s.rank,
            "nullspace_dim": s.nullspace_dim(),
            "free_keys": s.free_keys.iter().map(key_json).collect::<Vec<_>>(),
            "dependent": serde_json::to_value(s).expect("solution serializes")["dependent"].take(),
            "relations": relations,
        });
        if args.check_bernoulli {
            let rebuilt = reconstruct_s_bar(s, &bernoulli_free_values(s))?;
            let expected = family_power_sum_expansion(Family::Bernoulli, n);
            let matches = rebuilt == expected;
            if !matches {
                status = Status::Falsified;
            }
            text.push(format!(
                "Bernoulli check: rebuilt S-bar_{n} {} B_{n} = {}",
                if matches { "matches" } else { "DIFFERS from" },
                expected.render()
            ));
            doc["bernoulli_check"] = json!({
                "matches": matches,
                "expected": expected.render(),
                "rebuilt": rebuilt.render(),
            });
        }
        docs.push(doc);
    }
    let json = json!({ "command": "solve-c", "solutions": docs });
    Ok(Report { text, json, status })
}

pub fn bernoulli_relations(g: &GlobalOpts, args: &BernoulliArgs) -> Result<Report, CliError> {
    let max_index = args.max_index as usize;
    check_bounds(g, "bernoulli-relations (max index)", max_index, 0)?;
    let cfg = relation_config(g);
    let checks = verify_nonlinear_bernoulli();
    let identity = verify_bernoulli_identity(max_index, &cfg)?;

    let mut text = Vec::new();
    let mut status = Status::Ok;
    for (i, c) in checks.iter().enumerate() {
        if !c.holds {
            status = Status::Falsified;
        }
        text.push(format!("relation {}: {}  [value {}]", i + 1, c.relation, c.value));
    }
    let held = checks.iter().filter(|c| c.holds).count();
    text.push(format!("{held} of {} relations verified", checks.len()));
    for c in &identity.checks {
        if !c.holds {
            status = Status::Falsified;
        }
        let mark = if c.holds { "confirmed" } else { "MISMATCH" };
        text.push(format!(
            "a_{} = {}  [-(2a_1)^{}B_{}/{}: {mark}]",
            c.index, c.found, c.index, c.index, c.index
        ));
    }
    let json = json!({
        "command": "bernoulli-relations",
        "relations": checks.iter().map(|c| json!({ "relation": c.relation, "value": c.value, "holds": c.holds })).collect::<Vec<_>>(),
        "a_values": identity.checks.iter().map(|c| json!({
            "index": c.index,
            "found": c.found,
            "expected": c.expected,
            "holds": c.holds,
        })).collect::<Vec<_>>(),
    });
    Ok(Report { text, json, status })
}

pub fn families() -> Report {
    let mut text = Vec::new();
    let mut rows = Vec::new();
    for f in Family::ALL {
        let a: Vec<String> = f.coefficients(6).iter().map(format_rational).collect();
        text.push(format!("{:<10} g(s,t) = {}", f.name(), f.generating_function()));
        text.push(format!("{:<10} {}; a_1..a_6 = {}", "", f.a_formula(), a.join(", ")));
        rows.push(json!({
            "name": f.name(),
            "generating_function": f.generating_function(),
            "a_formula": f.a_formula(),
            "s0": format_rational(&f.s0()),
            "a": a,
        }));
    }
    text.push(format!("{:<10} free symbols a_k", "symbolic"));
    rows.push(json!({ "name": "symbolic" }));
    Report {
        text,
        json: json!({ "families": rows }),
        status: Status::Ok,
    }
}

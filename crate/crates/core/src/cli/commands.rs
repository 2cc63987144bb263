use std::fs;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Deserialize;
use serde_json::{json, Value};

use super::output::{Cell, Report, Table};
use super::*;
use crate::closedform::{self, CrossTerm, OkCorralDisplay, Poles};
use crate::limits::{self, ZnMethod};
use crate::moments::{self, MsNormalization};
use crate::numerics::{parse_rational, BigFloat, Real, Scalar, Transcendental};
use crate::oracle::{self, ExactDistribution};
use crate::simulate::{self, SimConfig};
use crate::weights::Family;

/// Instantiates `$f::<T>($args)` with the scalar type of `$mode`.
macro_rules! with_real {
    ($mode:expr, $f:ident ( $($arg:expr),* )) => {
        match $mode {
            ScalarMode::Exact => $f::<BigRational>($($arg),*),
            ScalarMode::BigFloat => $f::<BigFloat>($($arg),*),
            ScalarMode::Machine => $f::<f64>($($arg),*),
        }
    };
}

macro_rules! with_transcendental {
    ($mode:expr, $what:expr, $f:ident ( $($arg:expr),* )) => {
        match $mode {
            ScalarMode::Exact => Err(Error::InvalidArgument(format!(
                "--mode exact: {} is not rational; use bigfloat or float",
                $what
            ))),
            ScalarMode::BigFloat => $f::<BigFloat>($($arg),*),
            ScalarMode::Machine => $f::<f64>($($arg),*),
        }
    };
}

pub(super) fn dispatch(command: &Command, mode: Option<ScalarMode>) -> Result<(Report, ScalarMode)> {
    match command {
        Command::Pmf(a) => {
            let spec = a.spec.spec()?;
            let mode = resolve_mode(mode, &spec)?;
            Ok((with_real!(mode, pmf(&spec, a))?, mode))
        }
        Command::PmfMulti(a) => {
            let spec = a.spec.spec()?;
            let mode = resolve_mode(mode, &spec)?;
            Ok((with_real!(mode, pmf_multi(&spec, a))?, mode))
        }
        Command::Moments(a) => {
            let mode = match (a.a.is_some() || !a.avec.is_empty(), mode) {
                (true, m) => m.unwrap_or(ScalarMode::Exact),
                (false, m) => resolve_mode(m, &a.spec.spec()?)?,
            };
            Ok((with_real!(mode, moments_cmd(a))?, mode))
        }
        Command::OkcMoments(a) => {
            let mode = mode.unwrap_or(ScalarMode::Exact);
            Ok((with_real!(mode, okc_moments(a))?, mode))
        }
        Command::Limit(a) => {
            let default = match a.law {
                Law::Ym | Law::YmDensity => ScalarMode::Exact,
                _ => ScalarMode::BigFloat,
            };
            let mode = mode.unwrap_or(default);
            let report = match a.law {
                Law::Ym => with_real!(mode, limit_ym(a)),
                Law::YmDensity => with_real!(mode, limit_ym_density(a)),
                _ => with_transcendental!(mode, "this limit law", limit_transcendental(a)),
            }?;
            Ok((report, mode))
        }
        Command::Theta(a) => {
            let mode = mode.unwrap_or(ScalarMode::BigFloat);
            Ok((with_transcendental!(mode, "a truncated theta series", theta_cmd(a))?, mode))
        }
        Command::DualityCheck(a) => {
            let spec = a.spec()?;
            let mode = resolve_mode(mode, &spec)?;
            Ok((with_real!(mode, duality(&spec))?, mode))
        }
        Command::Oracle(a) => {
            let spec = a.spec.spec()?;
            let mode = resolve_mode(mode, &spec)?;
            Ok((with_real!(mode, oracle_cmd(&spec, a.method))?, mode))
        }
        Command::Simulate(a) => {
            let spec = a.spec.spec()?;
            let mode = resolve_mode(mode, &spec)?;
            Ok((with_real!(mode, simulate_cmd(&spec, a))?, mode))
        }
        Command::Compare(a) => compare(a, mode),
    }
}

fn resolve_mode(requested: Option<ScalarMode>, spec: &UrnSpec) -> Result<ScalarMode> {
    match requested {
        Some(ScalarMode::Exact) if !spec.is_rational() => Err(Error::InvalidArgument(
            "--mode exact: the weights are irrational; use bigfloat or float".into(),
        )),
        Some(m) => Ok(m),
        None => Ok(spec.default_mode()),
    }
}

fn sc<T: Real>(x: &T) -> Scalar {
    x.clone().into_scalar()
}

fn tolerance<T: Real>() -> f64 {
    match T::MODE {
        ScalarMode::Exact => 0.0,
        ScalarMode::BigFloat => 2f64.powi(-(bigfloat::default_precision() as i32 / 2)),
        ScalarMode::Machine => 1e-9,
    }
}

fn abs_diff<T: Real>(x: &T, y: &T) -> f64 {
    (x.clone() - y.clone()).abs_val().to_f64()
}

/// Equal in exact mode, relatively close otherwise.
fn agree<T: Real>(x: &T, y: &T) -> bool {
    if T::is_exact() {
        return x == y;
    }
    abs_diff(x, y) <= tolerance::<T>() * y.abs_val().to_f64().max(1.0)
}

fn two_color(spec: &UrnSpec, cmd: &str) -> Result<()> {
    if spec.colors() != 2 {
        return Err(Error::InvalidArgument(format!("{cmd} takes a two-color urn (--A/--B)")));
    }
    Ok(())
}

fn poles(r: Representation) -> Poles {
    match r {
        Representation::Alpha => Poles::Alpha,
        Representation::Beta => Poles::Beta,
    }
}

fn linear_factor(w: &WeightSequence) -> Option<u64> {
    match w.family() {
        Family::Linear { a } if !w.is_reciprocal() && a.is_integer() && a.is_positive() => a.to_integer().to_u64(),
        _ => None,
    }
}

fn oracle_dist<T: Real>(spec: &UrnSpec) -> Result<ExactDistribution<T>> {
    if spec.colors() == 2 {
        oracle::pmf_recurrence(spec)
    } else {
        oracle::pmf_recurrence_multi(spec)
    }
}

fn k_header(dims: usize) -> Vec<String> {
    if dims == 1 {
        vec!["k".into()]
    } else {
        (1..=dims).map(|j| format!("k{j}")).collect()
    }
}

fn k_cells(k: &[usize]) -> Vec<Cell> {
    k.iter().map(|&v| Cell::from(v)).collect()
}

fn pmf<T: Real>(spec: &UrnSpec, args: &PmfArgs) -> Result<Report> {
    two_color(spec, "pmf")?;
    let probs: Vec<T> = match args.method {
        PmfMethod::Closed => closedform::pmf_two_color(spec, poles(args.representation))?,
        PmfMethod::Oracle => oracle::pmf_recurrence(spec)?.into_probs(),
    };
    let mut table = Table::new(&["k", "p"]);
    for (k, p) in probs.iter().enumerate() {
        table.push(vec![k.into(), sc(p).into()]);
    }
    let mut report = Report::new(table);
    report.set("total", sc(&T::sum_terms(probs.iter().cloned())));
    let entries: Vec<Value> = probs.iter().enumerate().map(|(k, p)| json!({ "k": k, "p": sc(p) })).collect();
    report.set("pmf", entries);
    Ok(report)
}

fn pmf_multi<T: Real>(spec: &UrnSpec, args: &PmfMultiArgs) -> Result<Report> {
    let reference: ExactDistribution<T> = oracle_dist(spec)?;
    let r = spec.colors();
    let n = &spec.counts;
    let mut header = k_header(r - 1);
    header.extend(["p".into(), "method".into()]);
    let mut table = Table { header, rows: Vec::new() };
    let mut entries = Vec::new();
    let mut mismatched = Vec::new();
    let mut total = T::zero();
    for (k, exact) in reference.iter() {
        let full: Vec<u64> = k.iter().map(|&v| v as u64).collect();
        let (p, method) = match (args.method, spec.model) {
            (PmfMethod::Oracle, _) => (exact.clone(), "recurrence"),
            (PmfMethod::Closed, Model::I) => (closedform::pmf_multi_i(&spec.weights, n, &full)?, "closed-form"),
            (PmfMethod::Closed, Model::II) if k.iter().all(|&v| v >= 1) => {
                let cross = match args.cross_term {
                    CrossTermArg::Corrected => CrossTerm::Corrected,
                    CrossTermArg::Literal => CrossTerm::Literal,
                };
                (closedform::pmf_multi_ii(&spec.weights, n, &full, cross)?, "closed-form")
            }
            (PmfMethod::Closed, Model::II) => (exact.clone(), "recurrence"),
        };
        if args.cross_term == CrossTermArg::Literal && !agree(&p, exact) {
            mismatched.push(json!({ "k": k, "closed_form": sc(&p), "recurrence": sc(exact) }));
        }
        let mut row = k_cells(&k);
        row.push(sc(&p).into());
        row.push(method.into());
        table.push(row);
        entries.push(json!({ "k": k, "p": sc(&p), "method": method }));
        total = total + p;
    }
    let mut report = Report::new(table);
    report.set("pmf", entries);
    report.set("total", sc(&total));
    if args.cross_term == CrossTermArg::Literal {
        report.flag(!mismatched.is_empty());
        report.set("literal_mismatches", mismatched);
    }
    Ok(report)
}

fn compared_row<T: Real>(table: &mut Table, label: Vec<Cell>, closed: Option<&T>, direct: &T) -> (Value, bool) {
    let ok = closed.is_none_or(|c| agree(c, direct));
    let mut row = label;
    row.push(closed.map_or(Cell::Text(String::new()), |c| sc(c).into()));
    row.push(sc(direct).into());
    row.push(if ok { "yes" } else { "no" }.into());
    table.push(row);
    (json!({ "closed_form": closed.map(sc), "direct": sc(direct), "match": ok }), ok)
}

fn moments_cmd<T: Real>(args: &MomentsArgs) -> Result<Report> {
    if !args.avec.is_empty() {
        let n = &args.spec.counts;
        if n.len() != args.avec.len() || args.orders.len() + 1 != n.len() {
            return Err(Error::InvalidArgument(format!(
                "--counts needs {} values and --orders {} values",
                args.avec.len(),
                args.avec.len().saturating_sub(1)
            )));
        }
        let weights: Vec<WeightSequence> = args.avec.iter().map(|&a| WeightSequence::linear(a as i64)).collect();
        let spec = UrnSpec::new(Model::I, weights, n.clone())?;
        let closed: T = moments::multi_mixed_factorial_moment(&args.avec, n, &args.orders)?;
        let direct: T = moments::mixed_factorial_moment_direct(&spec, &args.orders)?;
        let mut table = Table::new(&["orders", "closed_form", "direct", "match"]);
        let label = args.orders.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
        let (value, ok) = compared_row(&mut table, vec![Cell::Text(label)], Some(&closed), &direct);
        let mut report = Report::new(table);
        report.set("mixed_factorial_moment", value);
        report.flag(!ok);
        return Ok(report);
    }
    if args.s == 0 {
        return Err(Error::InvalidArgument("--s must be at least 1".into()));
    }
    let (spec, sampling) = match (args.a, args.d) {
        (Some(a), Some(d)) => {
            let need = |f: &str| Error::InvalidArgument(format!("{f} is required"));
            let n = args.spec.n.ok_or_else(|| need("--n"))?;
            let m = args.spec.m.ok_or_else(|| need("--m"))?;
            let spec = UrnSpec::new(
                Model::I,
                vec![WeightSequence::linear(a as i64), WeightSequence::linear(d as i64)],
                vec![n, m],
            )?;
            (spec, Some((a, d, n, m)))
        }
        _ => (args.spec.spec()?, None),
    };
    two_color(&spec, "moments")?;
    let mut table = Table::new(&["s", "kind", "closed_form", "direct", "match"]);
    let mut factorial = Vec::new();
    let mut raw = Vec::new();
    let mut all_ok = true;
    for s in 1..=args.s {
        let fd: T = moments::factorial_moment_direct(&spec, s)?;
        let rd: T = moments::raw_moment_direct(&spec, s)?;
        let (fc, rc) = match sampling {
            Some((a, d, n, m)) => (
                Some(moments::sampling_factorial_moment::<T>(a, d, n, m, s)?),
                Some(moments::sampling_raw_moment::<T>(a, d, n, m, s)?),
            ),
            None => (None, None),
        };
        let (v, ok1) = compared_row(&mut table, vec![s.into(), "factorial".into()], fc.as_ref(), &fd);
        factorial.push(json!({ "s": s, "value": v }));
        let (v, ok2) = compared_row(&mut table, vec![s.into(), "raw".into()], rc.as_ref(), &rd);
        raw.push(json!({ "s": s, "value": v }));
        all_ok &= ok1 && ok2;
    }
    let mut report = Report::new(table);
    report.set("factorial_moments", factorial);
    report.set("raw_moments", raw);
    report.set("closed_form_available", sampling.is_some());
    report.flag(!all_ok);
    Ok(report)
}

fn okc_moments<T: Real>(args: &OkcMomentsArgs) -> Result<Report> {
    let (b, c, n, m) = (args.b, args.c, args.n, args.m);
    if args.s == 0 {
        return Err(Error::InvalidArgument("--s must be at least 1".into()));
    }
    let mut table = Table::new(&["s", "quantity", "closed_form", "direct", "match"]);
    let (mut raw, mut ms_polys, mut ms_moments, mut exponent) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut all_ok = true;
    for s in 1..=args.s {
        let closed: T = moments::okcorral_raw_moment(b, c, n, m, s)?;
        let direct: T = moments::okcorral_direct_moment(b, c, n, m, |k| T::from_u64(k).powi(s as u32))?;
        let (v, ok) = compared_row(&mut table, vec![s.into(), "raw".into()], Some(&closed), &direct);
        raw.push(json!({ "s": s, "value": v }));
        all_ok &= ok;

        let poly = moments::m_polynomial(s)?;
        ms_polys.push(json!({ "s": s, "coefficients": poly.coeffs().iter().map(|q| Scalar::Exact(q.clone())).collect::<Vec<_>>() }));
        let direct = T::from_rational(&moments::okcorral_ms_moment_direct(b, c, n, m, s)?);
        let mut forms = serde_json::Map::new();
        for form in MsNormalization::BOTH {
            let closed: T = moments::okcorral_ms_moment(b, c, n, m, s, form)?;
            let name = match form {
                MsNormalization::Total => "ms-total",
                MsNormalization::Separate => "ms-separate",
            };
            let (v, ok) = compared_row(&mut table, vec![s.into(), name.into()], Some(&closed), &direct);
            forms.insert(name.replace('-', "_"), v);
            all_ok &= ok;
        }
        ms_moments.push(json!({ "s": s, "forms": forms }));
        exponent.push(json!({ "s": s, "readings": moments::okcorral_exponent_diagnostics(b, c, n, m, s)? }));
    }
    let mut report = Report::new(table);
    report.set("raw_moments", raw);
    report.set("ms_polynomials", ms_polys);
    report.set("ms_moments", ms_moments);
    report.set("exponent_readings", exponent);
    report.flag(!all_ok);
    Ok(report)
}

fn need<V: Copy>(v: Option<V>, flag: &str, law: &str) -> Result<V> {
    v.ok_or_else(|| Error::InvalidArgument(format!("{flag} is required for --law {law}")))
}

/// Grid `0, step, 2 step, ...` up to and including 1.
fn grid(step: &str) -> Result<Vec<BigRational>> {
    let step = parse_rational(step)?;
    if !step.is_positive() || step > BigRational::one() {
        return Err(Error::InvalidArgument("--grid-step must lie in (0, 1]".into()));
    }
    let count = (BigRational::one() / &step).floor().to_integer().to_usize().unwrap_or(usize::MAX);
    if count > 1_000_000 {
        return Err(Error::InvalidArgument("--grid-step gives more than 10^6 points".into()));
    }
    let mut pts: Vec<BigRational> = (0..=count).map(|i| &step * BigRational::from_integer(i.into())).collect();
    if pts.last().is_some_and(|x| !x.is_one()) {
        pts.push(BigRational::one());
    }
    Ok(pts)
}

/// Evaluates `f` at `--q` or on `--grid-step`; the grid becomes plot data.
fn point_or_grid<T: Real>(args: &LimitArgs, f: impl Fn(&T) -> Result<T>) -> Result<Report> {
    let points = match (&args.q, &args.grid_step) {
        (Some(q), None) => vec![parse_rational(q)?],
        (None, Some(step)) => grid(step)?,
        _ => return Err(Error::InvalidArgument("give --q or --grid-step".into())),
    };
    let mut table = Table::new(&["x", "value"]);
    let mut values = Vec::new();
    for x in &points {
        let v = f(&T::from_rational(x))?;
        table.push(vec![Scalar::Exact(x.clone()).into(), sc(&v).into()]);
        values.push(json!({ "x": Scalar::Exact(x.clone()), "value": sc(&v) }));
    }
    let mut report = Report::new(table);
    report.set("values", values);
    Ok(report)
}

fn limit_ym<T: Real>(args: &LimitArgs) -> Result<Report> {
    let m = need(args.m, "--m", "ym")?;
    let s = need(args.s, "--s", "ym")?;
    let v: T = limits::ym_moment(m, s);
    let mut table = Table::new(&["s", "value"]);
    table.push(vec![s.into(), sc(&v).into()]);
    let mut report = Report::new(table);
    report.set("moment", sc(&v));
    if T::MODE == ScalarMode::Machine {
        let g = limits::ym_moment_gamma(m, s);
        report.set("gamma_form", g);
        report.set("gamma_form_difference", (g - v.to_f64()).abs());
    }
    Ok(report)
}

fn limit_ym_density<T: Real>(args: &LimitArgs) -> Result<Report> {
    let m = need(args.m, "--m", "ym-density")?;
    point_or_grid::<T>(args, |q| limits::ym_density(m, q))
}

fn limit_transcendental<T: Transcendental>(args: &LimitArgs) -> Result<Report> {
    match args.law {
        Law::Zn => {
            let n = need(args.n, "--n", "zn")?;
            let method = match args.series_tol {
                Some(tol) if tol > 0.0 => ZnMethod::Series { tol },
                Some(_) => return Err(Error::InvalidArgument("--series-tol must be positive".into())),
                None => ZnMethod::FiniteSum,
            };
            let ks: Vec<u64> = match args.k {
                Some(k) => vec![k],
                None => (0..=n).collect(),
            };
            let mut table = Table::new(&["k", "p", "error_bound"]);
            let mut entries = Vec::new();
            for k in ks {
                let t: limits::Truncated<T> = limits::zn_pmf(n, k, method)?;
                table.push(vec![k.into(), sc(&t.value).into(), Scalar::Machine(t.error_bound).into()]);
                entries.push(json!({ "k": k, "p": sc(&t.value), "error_bound": t.error_bound, "terms": t.terms }));
            }
            let mut report = Report::new(table);
            report.set("pmf", entries);
            Ok(report)
        }
        Law::ZnMoment => {
            let n = need(args.n, "--n", "zn-moment")?;
            let s = need(args.s, "--s", "zn-moment")?;
            let v: T = limits::zn_moment(n, s);
            let mut table = Table::new(&["s", "value"]);
            table.push(vec![s.into(), sc(&v).into()]);
            let mut report = Report::new(table);
            report.set("moment", sc(&v));
            Ok(report)
        }
        Law::W => {
            let s = need(args.s, "--s", "w")?;
            let v: T = limits::w_moment(s, args.family);
            let bracket = limits::w_moment_product(s, args.family, args.product_tol)?;
            let inside = bracket.contains(v.to_f64(), 1e-12 * v.to_f64().abs());
            let mut table = Table::new(&["s", "value", "product_lower", "product_upper"]);
            table.push(vec![
                s.into(),
                sc(&v).into(),
                Scalar::Machine(bracket.lower).into(),
                Scalar::Machine(bracket.upper).into(),
            ]);
            let mut report = Report::new(table);
            report.set("moment", sc(&v));
            report.set("family", args.family);
            report.set("product_bracket", bracket);
            report.flag(!inside);
            Ok(report)
        }
        Law::WCdf => {
            let mut report = point_or_grid::<T>(args, |q| limits::w_cdf(q, args.family))?;
            report.set("family", args.family);
            Ok(report)
        }
        Law::Ym | Law::YmDensity => unreachable!("rational laws are dispatched separately"),
    }
}

fn theta_cmd<T: Transcendental>(args: &ThetaArgs) -> Result<Report> {
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(Error::InvalidArgument("--tol must be positive".into()));
    }
    let q = T::from_rational(&parse_rational(&args.q)?);
    let th: T = limits::theta(&q, args.tol)?;
    let tp: T = limits::triple_product(&q, args.tol)?;
    let phi: T = limits::euler_phi_cubed(&q, args.tol)?;
    let phi_p: T = limits::euler_phi_cubed_product(&q, args.tol)?;
    let mut table = Table::new(&["quantity", "series", "product", "difference"]);
    table.push(vec!["theta".into(), sc(&th).into(), sc(&tp).into(), Scalar::Machine(abs_diff(&th, &tp)).into()]);
    table.push(vec![
        "phi_cubed".into(),
        sc(&phi).into(),
        sc(&phi_p).into(),
        Scalar::Machine(abs_diff(&phi, &phi_p)).into(),
    ]);
    let mut report = Report::new(table);
    report.set("theta", sc(&th));
    report.set("triple_product", sc(&tp));
    report.set("difference", abs_diff(&th, &tp));
    report.set("phi_cubed", sc(&phi));
    report.set("phi_cubed_product", sc(&phi_p));
    Ok(report)
}

/// Largest entrywise difference and whether all entries agree.
fn compare_vecs<T: Real>(a: &[T], b: &[T]) -> (f64, bool, bool) {
    let max = a.iter().zip(b).map(|(x, y)| abs_diff(x, y)).fold(0.0, f64::max);
    let exact = a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y);
    let close = a.len() == b.len() && a.iter().zip(b).all(|(x, y)| agree(x, y));
    (max, exact, close)
}

fn verdict(exact: bool, close: bool) -> &'static str {
    match (exact, close) {
        (true, _) => "exact match",
        (false, true) => "match within tolerance",
        _ => "mismatch",
    }
}

fn duality<T: Real>(spec: &UrnSpec) -> Result<Report> {
    let dual = spec.dual();
    let left: ExactDistribution<T> = oracle_dist(spec)?;
    let right: ExactDistribution<T> = oracle_dist(&dual)?;
    let (max, exact, close) = compare_vecs(left.probs(), right.probs());
    let mut table = Table::new(&["check", "max_abs_diff", "result"]);
    table.push(vec!["recurrence".into(), Scalar::Machine(max).into(), verdict(exact, close).into()]);
    let mut checks = vec![json!({ "check": "recurrence", "max_abs_diff": max, "result": verdict(exact, close) })];
    let mut ok = close;
    if spec.colors() == 2 {
        let closed = closedform::pmf_two_color::<T>(spec, Poles::Alpha)
            .and_then(|l| Ok((l, closedform::pmf_two_color::<T>(&dual, Poles::Alpha)?)));
        match closed {
            Ok((l, r)) => {
                let (max, exact, close) = compare_vecs(&l, &r);
                table.push(vec!["closed-form".into(), Scalar::Machine(max).into(), verdict(exact, close).into()]);
                checks.push(json!({ "check": "closed-form", "max_abs_diff": max, "result": verdict(exact, close) }));
                ok &= close;
            }
            Err(e) => checks.push(json!({ "check": "closed-form", "skipped": e.to_string() })),
        }
    }
    let mut report = Report::new(table);
    report.set("checks", checks);
    report.set("dual", dual);
    report.set("result", if ok { if exact { "exact match" } else { "match within tolerance" } } else { "mismatch" });
    report.flag(!ok);
    Ok(report)
}

fn dist_report<T: Real>(dist: &ExactDistribution<T>) -> Report {
    let mut header = k_header(dist.dims().len());
    header.push("p".into());
    let mut table = Table { header, rows: Vec::new() };
    let mut entries = Vec::new();
    for (k, p) in dist.iter() {
        let mut row = k_cells(&k);
        row.push(sc(p).into());
        table.push(row);
        entries.push(json!({ "k": k, "p": sc(p) }));
    }
    let mut report = Report::new(table);
    report.set("pmf", entries);
    report.set("total", sc(&dist.total()));
    report
}

fn oracle_cmd<T: Real>(spec: &UrnSpec, method: OracleMethod) -> Result<Report> {
    let dist: ExactDistribution<T> = match method {
        OracleMethod::Recurrence => oracle_dist(spec)?,
        OracleMethod::Enumerate => oracle::pmf_enumerate(spec)?,
    };
    Ok(dist_report(&dist))
}

fn simulate_cmd<T: Real>(spec: &UrnSpec, args: &SimulateArgs) -> Result<Report> {
    let config = SimConfig::new(spec.clone(), args.trials, args.seed).with_workers(args.workers);
    let empirical = simulate::empirical_pmf(&config)?;
    let exact: ExactDistribution<T> = oracle_dist(spec)?;
    let chi = simulate::chi_square(&empirical, &exact)?;
    let freqs = empirical.frequencies();
    let mut header = k_header(empirical.dims.len());
    header.extend(["count".into(), "frequency".into(), "expected".into()]);
    let mut table = Table { header, rows: Vec::new() };
    for (i, (k, p)) in exact.iter().enumerate() {
        let mut row = k_cells(&k);
        row.extend([empirical.counts[i].into(), Scalar::Machine(freqs[i]).into(), sc(p).into()]);
        table.push(row);
    }
    let mut report = Report::new(table);
    report.set("counts", &empirical.counts);
    report.set("dims", &empirical.dims);
    report.set("frequencies", freqs);
    report.set("means", (0..empirical.dims.len()).map(|j| empirical.mean(j)).collect::<Vec<_>>());
    report.set("chi_square", chi);
    Ok(report)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    specs: Vec<UrnSpec>,
    #[serde(default)]
    trials: Option<u64>,
    #[serde(default)]
    seed: Option<u64>,
}

fn compare(args: &CompareArgs, mode: Option<ScalarMode>) -> Result<(Report, ScalarMode)> {
    let (specs, trials, seed) = match &args.manifest {
        Some(path) => {
            if !args.spec.is_empty() {
                return Err(Error::InvalidArgument("--manifest cannot be combined with an urn".into()));
            }
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidArgument(format!("--manifest {}: {e}", path.display())))?;
            let manifest: Manifest = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("--manifest {}: {e}", path.display())))?;
            for s in &manifest.specs {
                s.validate()?;
            }
            (manifest.specs, manifest.trials.unwrap_or(args.trials), manifest.seed.unwrap_or(args.seed))
        }
        None => (vec![args.spec.spec()?], args.trials, args.seed),
    };
    let mut table = Table::new(&["spec", "check", "max_abs_diff", "result"]);
    let mut results = Vec::new();
    let mut worst = 0f64;
    let mut ok = true;
    let mut modes = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let m = resolve_mode(mode, spec)?;
        modes.push(m);
        let seed = seed.wrapping_add(i as u64);
        let c = with_real!(m, compare_one(spec, trials, seed, args.workers))?;
        for check in &c.checks {
            let (name, max, result) = (check["check"].as_str().unwrap_or(""), check["max_abs_diff"].as_f64(), check["result"].as_str());
            let max_cell = max.map_or(Cell::Text(String::new()), |v| Scalar::Machine(v).into());
            table.push(vec![i.into(), name.into(), max_cell, result.unwrap_or("skipped").into()]);
        }
        worst = worst.max(c.max_discrepancy);
        ok &= c.ok;
        results.push(json!({ "spec": spec, "mode": m, "checks": c.checks, "simulation": c.simulation, "max_discrepancy": c.max_discrepancy }));
    }
    let mut report = Report::new(table);
    report.set("results", results);
    report.set("max_discrepancy", worst);
    report.set("trials", trials);
    report.set("seed", seed);
    report.flag(!ok);
    let mode = modes.first().copied().unwrap_or(ScalarMode::Exact);
    Ok((report, mode))
}

struct Comparison {
    checks: Vec<Value>,
    simulation: Value,
    max_discrepancy: f64,
    ok: bool,
}

/// A closed form evaluated on every outcome, or the reason it does not apply.
type Candidate<T> = (String, Result<Vec<T>>);

fn closed_candidates<T: Real>(spec: &UrnSpec, reference: &ExactDistribution<T>) -> Vec<Candidate<T>> {
    let mut out: Vec<Candidate<T>> = Vec::new();
    let (w, n) = (&spec.weights, &spec.counts);
    if spec.colors() == 2 {
        for p in Poles::BOTH {
            let tag = match p {
                Poles::Alpha => "alpha",
                Poles::Beta => "beta",
            };
            out.push((format!("two-color-{tag}"), closedform::pmf_two_color(spec, p)));
        }
        let (a, b) = (linear_factor(&w[0]), linear_factor(&w[1]));
        if let (Some(a), Some(b)) = (a, b) {
            let (nn, mm) = (n[0], n[1]);
            match spec.model {
                Model::I => {
                    for p in Poles::BOTH {
                        let v = (0..=nn).map(|k| closedform::pmf_sampling_polya(a, b, nn, mm, k, p)).collect();
                        out.push((format!("linear-sampling-{}", if p == Poles::Alpha { "alpha" } else { "beta" }), v));
                    }
                }
                Model::II => {
                    for d in OkCorralDisplay::BOTH {
                        let v = (0..=nn).map(|k| closedform::pmf_okcorral_polya(b, a, nn, mm, k, d)).collect();
                        let tag = if d == OkCorralDisplay::BlackSum { "black-sum" } else { "white-sum" };
                        out.push((format!("linear-okcorral-{tag}"), v));
                    }
                }
            }
        }
        return out;
    }
    let outcomes: Vec<Vec<u64>> = reference
        .iter()
        .map(|(k, _)| k.iter().map(|&v| v as u64).collect())
        .collect();
    match spec.model {
        Model::I => {
            out.push(("multicolor".into(), outcomes.iter().map(|k| closedform::pmf_multi_i(w, n, k)).collect()));
            let lin: Option<Vec<u64>> = w.iter().map(linear_factor).collect();
            if let Some(a) = lin {
                out.push((
                    "linear-multicolor".into(),
                    outcomes.iter().map(|k| closedform::pmf_multi_polya(&a, n, k)).collect(),
                ));
            }
        }
        Model::II => {
            let v = outcomes
                .iter()
                .zip(reference.probs())
                .map(|(k, exact)| {
                    if k.iter().all(|&v| v >= 1) {
                        closedform::pmf_multi_ii(w, n, k, CrossTerm::Corrected)
                    } else {
                        Ok(exact.clone())
                    }
                })
                .collect();
            out.push(("multicolor".into(), v));
        }
    }
    out
}

fn compare_one<T: Real>(spec: &UrnSpec, trials: u64, seed: u64, workers: usize) -> Result<Comparison> {
    let reference: ExactDistribution<T> = oracle_dist(spec)?;
    let mut checks = Vec::new();
    let mut worst = 0f64;
    let mut ok = true;
    for (name, values) in closed_candidates(spec, &reference) {
        match values {
            Ok(v) => {
                let (max, exact, close) = compare_vecs(&v, reference.probs());
                worst = worst.max(max);
                ok &= close;
                checks.push(json!({ "check": name, "max_abs_diff": max, "result": verdict(exact, close) }));
            }
            Err(e @ (Error::NotDistinct(_) | Error::Unsupported(_) | Error::InvalidArgument(_))) => {
                checks.push(json!({ "check": name, "skipped": e.to_string() }));
            }
            Err(e) => return Err(e),
        }
    }
    let simulation = if trials > 0 {
        let config = SimConfig::new(spec.clone(), trials, seed).with_workers(workers);
        let empirical = simulate::empirical_pmf(&config)?;
        let chi = simulate::chi_square(&empirical, &reference)?;
        let max_freq = empirical
            .frequencies()
            .iter()
            .zip(reference.probs())
            .map(|(f, p)| (f - p.to_f64()).abs())
            .fold(0.0, f64::max);
        json!({ "trials": trials, "seed": seed, "chi_square": chi, "max_abs_frequency_diff": max_freq })
    } else {
        Value::Null
    };
    let total = reference.total();
    if !agree(&total, &T::one()) {
        ok = false;
        worst = worst.max(abs_diff(&total, &T::one()));
    }
    Ok(Comparison { checks, simulation, max_discrepancy: worst, ok })
}

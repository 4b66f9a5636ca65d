use std::io::Write;

use rayon::prelude::*;
use rug::{Float, Integer};

use super::report::{Check, Report};
use super::{Function, RunArgs};
use crate::bernoulli::{
    bernoulli_number, gen_bernoulli, gen_bernoulli_conductor, gen_bernoulli_series,
};
use crate::dyadic::{
    error_table_auto, factorization_residuals, fe_residual, log_q_bound, log_q_prime_sum, p_series,
    q_analytic, q_exact_even_with, QRepresentation, SignConvention,
};
use crate::error::{Error, Result};
use crate::euler::{dedekind_zeta, p_product, Half};
use crate::lfunc::{
    l_even_exact, zeta_dyadic_bounds, zeta_even_exact, zeta_real, ExactSpecialValue,
};
use crate::numkernel::{bits_for_digits, rexp, ten_pow_neg, PrecReal};
use crate::quadchar::QuadraticCharacter;

const MAX_DIGITS: u32 = 200_000;
/// `table` raises digits up to this multiple of the requested value.
const TABLE_DIGIT_GROWTH: u32 = 16;
const DEFAULT_SIGMA_GRID: [&str; 4] = ["1.5", "2", "3", "3.14159"];

fn character(args: &RunArgs) -> Result<QuadraticCharacter> {
    QuadraticCharacter::from_delta(args.discriminant)
}

fn digits(args: &RunArgs) -> Result<u32> {
    if args.digits == 0 || args.digits > MAX_DIGITS {
        return Err(Error::domain(format!(
            "digits must lie in 1..={MAX_DIGITS}; got {}",
            args.digits
        )));
    }
    Ok(args.digits)
}

fn parse_sigma(text: &str, digits: u32) -> Result<PrecReal> {
    PrecReal::parse(text, digits.max(50) + 10)
}

fn sigma_arg(args: &RunArgs, digits: u32) -> Result<PrecReal> {
    let text = args
        .sigma
        .as_deref()
        .ok_or_else(|| Error::domain("missing -s/--sigma"))?;
    parse_sigma(text, digits)
}

/// Short scientific rendering of an error bound.
fn bound_str(x: &Float) -> String {
    if x.is_zero() {
        "0".to_string()
    } else {
        x.to_string_radix(10, Some(3))
    }
}

fn value_str(x: &PrecReal, digits: u32) -> String {
    x.to_plain_string(digits as usize)
}

/// `|x|·10^{1-D}`: rounding bound of a value rendered at `D` digits.
fn render_bound(x: &PrecReal, digits: u32) -> Float {
    Float::with_val(64, x.value().abs_ref()) * ten_pow_neg(i64::from(digits) - 1, 64)
}

/// Absolute bound on `|p - p̃|` from a bound `t` on `|log p - log p̃|`.
fn abs_from_log_bound(p: &PrecReal, t: &PrecReal, digits: u32) -> Float {
    let em1 = Float::with_val(64, t.value()).exp_m1();
    Float::with_val(64, p.value().abs_ref()) * em1 * 1.0001f64 + render_bound(p, digits)
}

pub(super) fn cmd_char(args: &RunArgs) -> Result<Report> {
    let digits = digits(args)?;
    let c = character(args)?;
    let d = c.modulus();
    let mut report = Report::new(args.config("char"));
    let odd = c.parity() == 1;
    let values = c
        .values(2 * d as usize)
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let (re, im) = c.gauss_sum(digits);
    let root = Integer::from(d).sqrt();
    let magnitude = if Integer::from(&root * &root) == d {
        root.to_string()
    } else {
        format!("√{d}")
    };
    let exact = if odd {
        format!("{magnitude}i")
    } else {
        magnitude
    };
    let sqrt_d = PrecReal::from_float(Float::with_val(bits_for_digits(digits), d).sqrt(), digits);
    let gauss_limit = render_bound(&sqrt_d, digits);
    let gauss_bound = bound_str(&gauss_limit);
    // A component below its rounding bound is zero.
    let component = |x: &PrecReal| {
        if *x.value().as_abs() <= gauss_limit {
            "0".to_string()
        } else {
            value_str(x, digits)
        }
    };
    report.push_row(vec![
        ("quantity", "discriminant".to_string()),
        ("value", args.discriminant.to_string()),
        ("error_bound", "0".to_string()),
    ]);
    report.push_row(vec![
        ("quantity", "modulus"),
        ("value", &d.to_string()),
        ("error_bound", "0"),
    ]);
    report.push_row(vec![
        ("quantity", "parity"),
        ("value", if odd { "odd" } else { "even" }),
        ("error_bound", "0"),
    ]);
    report.push_row(vec![
        ("quantity", format!("chi(1..{})", 2 * d)),
        ("value", values),
        ("error_bound", "0".to_string()),
    ]);
    report.push_row(vec![
        ("quantity", "gauss_sum"),
        ("value", &exact),
        ("error_bound", "0"),
    ]);
    report.push_row(vec![
        ("quantity", "gauss_sum_re".to_string()),
        ("value", component(&re)),
        ("error_bound", gauss_bound.clone()),
    ]);
    report.push_row(vec![
        ("quantity", "gauss_sum_im".to_string()),
        ("value", component(&im)),
        ("error_bound", gauss_bound),
    ]);
    Ok(report)
}

fn exact_row(report: &mut Report, name: &str, v: &ExactSpecialValue, digits: u32) {
    let x = v.render(digits);
    report.push_row(vec![
        ("quantity", name.to_string()),
        ("exact", v.to_string()),
        ("decimal", value_str(&x, digits)),
        ("error_bound", bound_str(&render_bound(&x, digits))),
    ]);
}

pub(super) fn cmd_exact(args: &RunArgs) -> Result<Report> {
    let digits = digits(args)?;
    let c = character(args)?;
    let n = args.n.ok_or_else(|| Error::domain("missing -n"))?;
    if n < 2 || n % 2 != 0 {
        return Err(Error::Parity(format!(
            "-n must be an even integer >= 2; got {n}"
        )));
    }
    if c.parity() != 0 {
        return Err(Error::Parity(format!(
            "Δ={} gives an odd character; closed forms need Δ > 0",
            args.discriminant
        )));
    }
    let n = u32::try_from(n).map_err(|_| Error::domain("-n is too large"))?;
    let convention = if args.no_sign_fix {
        SignConvention::Uncorrected
    } else {
        SignConvention::Corrected
    };
    let mut report = Report::new(args.config("exact"));
    let bn = bernoulli_number(n as usize)?;
    let table = gen_bernoulli(&c, n as usize)?;
    let bchi = table.get(n as usize).expect("table covers n").clone();
    exact_row(
        &mut report,
        &format!("B_{n}"),
        &ExactSpecialValue::rational(bn),
        digits,
    );
    exact_row(
        &mut report,
        &format!("B_{n},chi"),
        &ExactSpecialValue::rational(bchi),
        digits,
    );
    exact_row(
        &mut report,
        &format!("zeta({n})"),
        &zeta_even_exact(n)?,
        digits,
    );
    exact_row(
        &mut report,
        &format!("L({n},chi)"),
        &l_even_exact(&c, n)?,
        digits,
    );
    for half in [Half::Split, Half::Inert] {
        let rep = QRepresentation::new(half, c.clone());
        let v = q_exact_even_with(&rep, n, convention)?;
        exact_row(&mut report, &format!("q{}({n})", half.index()), &v, digits);
    }
    if args.no_sign_fix {
        report
            .notes
            .push("note: q1 shown without the corrective sign (-1)^(1+n)".to_string());
    }
    Ok(report)
}

pub(super) fn cmd_eval(args: &RunArgs) -> Result<Report> {
    let digits = digits(args)?;
    let c = character(args)?;
    let function = args.function.ok_or_else(|| Error::domain("missing --fn"))?;
    let sigma = sigma_arg(args, digits)?;
    let mut report = Report::new(args.config("eval"));
    let label = format!(
        "{}({})",
        function.name(),
        args.sigma.as_deref().unwrap_or("")
    );
    match function {
        Function::P1 | Function::P2 => {
            let half = if function == Function::P1 {
                Half::Split
            } else {
                Half::Inert
            };
            let res = p_series(half, &c, &sigma, args.terms, digits)?;
            let bound = abs_from_log_bound(&res.value, &res.tail_bound, digits);
            report.push_row(vec![
                ("quantity", label),
                ("value", value_str(&res.value, digits)),
                ("error_bound", bound_str(&bound)),
                ("path", format!("series N={}", res.terms)),
            ]);
            for (k, ((x, e), path)) in res
                .partial_terms
                .iter()
                .zip(&res.term_errors)
                .zip(&res.paths)
                .enumerate()
            {
                report.push_row(vec![
                    ("quantity", format!("x_{k}")),
                    ("value", x.with_digits(20).to_sci_string()),
                    ("error_bound", bound_str(e.value())),
                    ("path", path.to_string()),
                ]);
            }
            report.push_row(vec![
                ("quantity", "log_tail_bound".to_string()),
                ("value", bound_str(res.tail_bound.value())),
                ("error_bound", "0".to_string()),
                ("path", "majorant+term errors".to_string()),
            ]);
        }
        Function::Q1 | Function::Q2 => {
            let half = if function == Function::Q1 {
                Half::Split
            } else {
                Half::Inert
            };
            let q = q_analytic(&QRepresentation::new(half, c.clone()), &sigma, digits)?;
            report.push_row(vec![
                ("quantity", label),
                ("value", value_str(&q, digits)),
                ("error_bound", bound_str(&render_bound(&q, digits))),
                ("path", "analytic".to_string()),
            ]);
        }
        Function::ZetaK => {
            let z = dedekind_zeta(&c, &sigma, digits)?;
            report.push_row(vec![
                ("quantity", label),
                ("value", value_str(&z, digits)),
                ("error_bound", bound_str(&render_bound(&z, digits))),
                ("path", "analytic".to_string()),
            ]);
        }
    }
    Ok(report)
}

pub(super) fn cmd_table(args: &RunArgs, err: &mut dyn Write) -> Result<Report> {
    let digits = digits(args)?;
    let c = character(args)?;
    let half = match args.function.unwrap_or(Function::P1) {
        Function::P1 => Half::Split,
        Function::P2 => Half::Inert,
        other => {
            return Err(Error::domain(format!(
                "table supports --fn p1 or p2; got {}",
                other.name()
            )))
        }
    };
    let sigma = parse_sigma(args.sigma.as_deref().unwrap_or("2"), digits)?;
    let max_digits = digits
        .saturating_mul(TABLE_DIGIT_GROWTH)
        .clamp(digits, MAX_DIGITS);
    let table = error_table_auto(&c, half, &sigma, args.terms, digits, max_digits)?;
    let mut config = args.config("table");
    if config.sigma.is_none() {
        config.sigma = Some("2".to_string());
    }
    if config.function.is_none() {
        config.function = Some("p1".to_string());
    }
    if table.digits != digits {
        let notice = format!(
            "notice: digits raised from {digits} to {} so every row exceeds the reference uncertainty",
            table.digits
        );
        let _ = writeln!(err, "{notice}");
        config.effective_digits = Some(table.digits.to_string());
    }
    let mut report = Report::new(config);
    for row in &table.rows {
        let exp = |e: Option<i64>| e.map_or("-inf".to_string(), |e| e.to_string());
        report.push_row(vec![
            ("N", row.n.to_string()),
            ("error_exponent", exp(row.exponent)),
            ("error_decimal", row.error.to_plain_string(12)),
            ("tail_bound_exponent", exp(row.tail_exponent)),
        ]);
    }
    Ok(report)
}

fn check(name: String, passed: bool, measured: String, limit: String) -> Check {
    Check {
        name,
        passed,
        measured,
        limit,
    }
}

fn sigma_checks(
    c: &QuadraticCharacter,
    text: &str,
    args: &RunArgs,
    digits: u32,
) -> Result<Vec<Check>> {
    let sigma = parse_sigma(text, digits)?;
    let mut out = Vec::new();

    let (lo, hi) = zeta_dyadic_bounds(&sigma)?;
    let z = zeta_real(&sigma, digits)?;
    out.push(check(
        format!("zeta_bracket(s={text})"),
        lo < z && z < hi,
        value_str(&z, 20),
        format!("({}, {})", value_str(&lo, 20), value_str(&hi, 20)),
    ));

    for half in [Half::Split, Half::Inert] {
        let i = half.index();
        let rep = QRepresentation::new(half, c.clone());
        if *sigma.value() >= 2 {
            let q = q_analytic(&rep, &sigma, digits)?;
            let log_q = crate::numkernel::rlog(&q)?.abs();
            let bound = log_q_bound(&sigma)?;
            out.push(check(
                format!("log_q{i}_bound(s={text})"),
                log_q <= bound,
                bound_str(log_q.value()),
                bound_str(bound.value()),
            ));
        }
        let fe = fe_residual(half, c, &sigma, args.terms, digits)?;
        out.push(check(
            format!("fe_residual_{i}(s={text})"),
            fe.residual <= fe.bound,
            bound_str(fe.residual.value()),
            bound_str(fe.bound.value()),
        ));
    }

    let fr = factorization_residuals(c, &sigma, args.terms, digits)?;
    out.push(check(
        format!("factorization_zeta(s={text})"),
        fr.r_zeta <= fr.bound_zeta,
        bound_str(fr.r_zeta.value()),
        bound_str(fr.bound_zeta.value()),
    ));
    out.push(check(
        format!("factorization_L(s={text})"),
        fr.r_l <= fr.bound_l,
        bound_str(fr.r_l.value()),
        bound_str(fr.bound_l.value()),
    ));
    Ok(out)
}

fn triple_checks(c: &QuadraticCharacter, args: &RunArgs, digits: u32) -> Result<Vec<Check>> {
    let convention = if args.no_sign_fix {
        SignConvention::Uncorrected
    } else {
        SignConvention::Corrected
    };
    let mut out = Vec::new();
    for half in [Half::Split, Half::Inert] {
        let i = half.index();
        let rep = QRepresentation::new(half, c.clone());
        for n in [2u32, 4, 8] {
            let sigma = PrecReal::from_i64(i64::from(n), digits + 10);
            let exact = q_exact_even_with(&rep, n, convention)?.render(digits);
            let analytic = q_analytic(&rep, &sigma, digits)?;
            let diff = (&exact - &analytic).abs();
            let tol = ten_pow_neg(i64::from(digits) - 3, 64);
            out.push(check(
                format!("q{i}_exact_vs_analytic(n={n})"),
                *diff.value() <= tol,
                bound_str(diff.value()),
                bound_str(&tol),
            ));
            let (log_sum, tail) = log_q_prime_sum(&rep, &sigma, digits, args.prime_limit)?;
            let lo = rexp(&(&log_sum - &tail))?;
            let hi = rexp(&(&log_sum + &tail))?;
            out.push(check(
                format!("q{i}_prime_sum_bracket(n={n})"),
                lo <= analytic && analytic <= hi,
                value_str(&analytic, 20),
                format!("[{}, {}]", value_str(&lo, 20), value_str(&hi, 20)),
            ));
        }
    }
    Ok(out)
}

fn oracle_checks(c: &QuadraticCharacter, args: &RunArgs, digits: u32) -> Result<Vec<Check>> {
    let sigma = PrecReal::from_i64(2, digits + 10);
    let mut out = Vec::new();
    for half in [Half::Split, Half::Inert] {
        let series = p_series(half, c, &sigma, args.terms, digits)?;
        let product = p_product(c, half, &sigma, args.prime_limit, digits)?;
        let diff = (&series.value - &product.value).abs();
        let limit = abs_from_log_bound(&product.value, &product.tail_bound, digits);
        out.push(check(
            format!(
                "p{}_series_vs_product(s=2,P={})",
                half.index(),
                args.prime_limit
            ),
            *diff.value() <= limit,
            bound_str(diff.value()),
            bound_str(&limit),
        ));
    }
    Ok(out)
}

fn bernoulli_check(c: &QuadraticCharacter) -> Result<Check> {
    let a = gen_bernoulli_series(c, 50)?;
    let b = gen_bernoulli_conductor(c, 50)?;
    let parity = c.parity() as usize;
    let pattern = a
        .iter()
        .enumerate()
        .all(|(k, v)| (k % 2 == parity) == (*v != 0) || (k == 0 && *v == 0));
    let mismatches = a.iter().zip(&b).filter(|(x, y)| x != y).count();
    Ok(check(
        "bernoulli_dual_route(k<=50)".to_string(),
        mismatches == 0 && pattern,
        format!("{mismatches} mismatches"),
        "0 mismatches, B_k,chi = 0 iff k and chi differ in parity".to_string(),
    ))
}

pub(super) fn cmd_verify(args: &RunArgs) -> Result<Report> {
    let digits = digits(args)?;
    let c = character(args)?;
    let grid: Vec<String> = match &args.sigma {
        Some(s) => vec![s.clone()],
        None => DEFAULT_SIGMA_GRID.iter().map(|s| s.to_string()).collect(),
    };
    let per_sigma: Vec<Vec<Check>> = grid
        .par_iter()
        .map(|s| sigma_checks(&c, s, args, digits))
        .collect::<Result<_>>()?;
    let mut report = Report::new(args.config("verify"));
    report.checks.extend(per_sigma.into_iter().flatten());
    if c.parity() == 0 {
        report.checks.extend(triple_checks(&c, args, digits)?);
    }
    report.checks.extend(oracle_checks(&c, args, digits)?);
    report.checks.push(bernoulli_check(&c)?);
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    report
        .notes
        .push(format!("{} checks, {} failed", report.checks.len(), failed));
    Ok(report)
}

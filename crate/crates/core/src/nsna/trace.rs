//! CSV emission and re-validation of iteration traces.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{IterationRecord, StepKind};

pub const TRACE_HEADER: &str = "k,mu,merit,c_avg,beta,alpha,step_kind,res,direction_norm";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("iteration {k}: {message}")]
    Violation { k: usize, message: String },
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

pub fn write_trace_csv<W: Write>(mut w: W, records: &[IterationRecord]) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{:?},{:?},{:?},{:?},{},{},{:?},{}",
            r.k,
            r.mu,
            r.merit,
            r.c_avg,
            r.beta,
            opt(r.alpha),
            r.step_kind.as_str(),
            r.res,
            opt(r.direction_norm),
        )?;
    }
    Ok(())
}

pub fn read_trace_csv<R: BufRead>(r: R) -> Result<Vec<IterationRecord>, TraceError> {
    let mut lines = r.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).transpose()?;
    if header.as_deref().map(str::trim) != Some(TRACE_HEADER) {
        return Err(TraceError::Parse {
            line: 1,
            message: format!("expected header `{TRACE_HEADER}`"),
        });
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let err = |message: String| TraceError::Parse {
            line: lineno,
            message,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 9 {
            return Err(err(format!("expected 9 fields, found {}", fields.len())));
        }
        let num = |i: usize| -> Result<f64, TraceError> {
            fields[i]
                .parse::<f64>()
                .map_err(|e| err(format!("field {}: {e}", i + 1)))
        };
        let opt_num = |i: usize| -> Result<Option<f64>, TraceError> {
            if fields[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let step_kind = match fields[6] {
            "full" => StepKind::Full,
            "line_search" => StepKind::LineSearch,
            "stop" => StepKind::Stop,
            other => return Err(err(format!("unknown step kind `{other}`"))),
        };
        out.push(IterationRecord {
            k: fields[0]
                .parse()
                .map_err(|e| err(format!("field 1: {e}")))?,
            mu: num(1)?,
            merit: num(2)?,
            c_avg: num(3)?,
            beta: num(4)?,
            alpha: opt_num(5)?,
            step_kind,
            res: num(7)?,
            direction_norm: opt_num(8)?,
        });
    }
    Ok(out)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Re-checks the solver invariants row by row: `mu > 0`, `beta < mu`,
/// `merit <= C`, a constant ratio `beta / C`, strictly decreasing `C` and
/// `mu`, and the smoothing-parameter update of the step taken.
pub fn check_trace(records: &[IterationRecord]) -> Result<(), TraceError> {
    let violation = |k: usize, message: String| TraceError::Violation { k, message };
    let gamma = records
        .iter()
        .find(|r| r.c_avg > 0.0)
        .map(|r| r.beta / r.c_avg);
    for (i, r) in records.iter().enumerate() {
        if r.k != i {
            return Err(violation(r.k, format!("expected iteration index {i}")));
        }
        if !(r.mu > 0.0) {
            return Err(violation(r.k, format!("mu = {} is not positive", r.mu)));
        }
        if !(r.beta < r.mu) {
            return Err(violation(r.k, format!("beta = {} is not below mu = {}", r.beta, r.mu)));
        }
        if !(r.merit <= r.c_avg) {
            return Err(violation(r.k, format!("merit {} exceeds C = {}", r.merit, r.c_avg)));
        }
        if let Some(g) = gamma {
            if r.c_avg > 0.0 && !rel_close(r.beta, g * r.c_avg, 1e-12) {
                return Err(violation(r.k, format!("beta / C = {} differs from {g}", r.beta / r.c_avg)));
            }
        }
        match (r.step_kind, r.alpha) {
            (StepKind::Stop, None) => {}
            (StepKind::Stop, Some(_)) => return Err(violation(r.k, "stop row carries a step".into())),
            (_, Some(a)) if a > 0.0 && a <= 1.0 => {}
            (_, a) => return Err(violation(r.k, format!("step length {a:?} outside (0, 1]"))),
        }
        if r.step_kind == StepKind::Full && r.alpha != Some(1.0) {
            return Err(violation(r.k, "full step with alpha != 1".into()));
        }
        let Some(next) = records.get(i + 1) else {
            continue;
        };
        if r.step_kind == StepKind::Stop {
            return Err(violation(r.k, "stop row is not the last row".into()));
        }
        if !(next.c_avg < r.c_avg) {
            return Err(violation(next.k, format!("C did not decrease: {} -> {}", r.c_avg, next.c_avg)));
        }
        if !(next.mu < r.mu) {
            return Err(violation(next.k, format!("mu did not decrease: {} -> {}", r.mu, next.mu)));
        }
        let alpha = r.alpha.unwrap_or(1.0);
        let expected_mu = (1.0 - alpha) * r.mu + alpha * r.beta;
        let tol = if r.step_kind == StepKind::Full { 1e-15 } else { 1e-14 };
        if !rel_close(next.mu, expected_mu, tol) {
            return Err(violation(
                next.k,
                format!("mu = {} but the step implies {expected_mu}", next.mu),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(k: usize, mu: f64, c: f64, kind: StepKind, alpha: Option<f64>) -> IterationRecord {
        IterationRecord {
            k,
            mu,
            merit: c * 0.5,
            c_avg: c,
            beta: 1e-3 * c,
            alpha,
            step_kind: kind,
            res: c.sqrt(),
            direction_norm: alpha.map(|_| 1.0),
        }
    }

    fn valid_trace() -> Vec<IterationRecord> {
        let r0 = rec(0, 0.5, 10.0, StepKind::LineSearch, Some(0.8));
        let mu1 = 0.2 * 0.5 + 0.8 * r0.beta;
        let r1 = rec(1, mu1, 4.0, StepKind::Full, Some(1.0));
        let r2 = rec(2, r1.beta, 1.0, StepKind::Stop, None);
        vec![r0, r1, r2]
    }

    #[test]
    fn csv_round_trip_and_check() {
        let trace = valid_trace();
        check_trace(&trace).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(TRACE_HEADER));
        assert!(text.lines().nth(3).unwrap().contains(",stop,"));
        let back = read_trace_csv(&buf[..]).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn check_detects_violations() {
        let mut t = valid_trace();
        t[1].c_avg = 20.0;
        t[1].beta = 1e-3 * 20.0;
        assert!(matches!(check_trace(&t), Err(TraceError::Violation { k: 1, .. })));

        let mut t = valid_trace();
        t[2].mu *= 1.5;
        assert!(check_trace(&t).is_err());

        let mut t = valid_trace();
        t[0].merit = 11.0;
        assert!(check_trace(&t).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = format!("{TRACE_HEADER}\n0,1,1,1,0,1,full,1,1\n1,x,1,1,0,,stop,1,\n");
        match read_trace_csv(bad.as_bytes()) {
            Err(TraceError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_trace_csv("k,mu\n".as_bytes()).is_err());
    }
}

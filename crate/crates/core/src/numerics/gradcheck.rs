use super::Parameterized;
use crate::error::{Error, Result};

pub const FD_STEP: f64 = 1e-5;
pub const DEFAULT_PARAM_CAP: usize = 5_000;
const NOISE_ULPS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckFailure {
    pub block: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_relative_error: f64,
    /// Entries whose discrepancy was below the finite-difference noise floor.
    pub noise_limited: usize,
    pub failures: Vec<GradCheckFailure>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn nudge<N: Parameterized + ?Sized>(net: &mut N, flat: usize, delta: f64) {
    let mut offset = 0;
    net.visit_mut(&mut |_, t| {
        let len = t.len();
        if (offset..offset + len).contains(&flat) {
            t.values_mut()[flat - offset] += delta;
        }
        offset += len;
    });
}

/// Compares analytic gradients against central finite differences.
///
/// `loss` evaluates the scalar loss without touching gradients.
/// `loss_and_grad` evaluates the same loss and accumulates its gradient into
/// the network's grad buffers. Relative error per parameter is
/// `|a - n| / max(1e-8, |a| + |n|)`. Entries with `|a - n|` below the
/// round-off floor of the central difference, `NOISE_ULPS * eps * (|L+| + |L-|) / h`,
/// count as agreeing and are tallied in `noise_limited`.
pub fn gradient_check<N, L, G>(
    net: &mut N,
    mut loss: L,
    mut loss_and_grad: G,
    tolerance: f64,
    cap: usize,
) -> Result<GradCheckReport>
where
    N: Parameterized + ?Sized,
    L: FnMut(&N) -> Result<f64>,
    G: FnMut(&mut N) -> Result<f64>,
{
    let n = net.num_parameters();
    if n > cap {
        return Err(Error::Unsupported(format!(
            "gradient check over {n} parameters exceeds cap {cap}"
        )));
    }
    if n == 0 {
        return Ok(GradCheckReport::default());
    }
    net.zero_grad();
    loss_and_grad(net)?;
    let mut analytic = Vec::with_capacity(n);
    let mut names = Vec::with_capacity(n);
    net.visit(&mut |name, t| {
        analytic.extend_from_slice(t.grad());
        names.extend((0..t.len()).map(|i| (name.to_string(), i)));
    });
    net.zero_grad();
    net.clear_tape();

    let mut report = GradCheckReport {
        checked: n,
        ..Default::default()
    };
    for (j, &a) in analytic.iter().enumerate() {
        nudge(net, j, FD_STEP);
        let plus = loss(net)?;
        nudge(net, j, -2.0 * FD_STEP);
        let minus = loss(net)?;
        nudge(net, j, FD_STEP);
        let numeric = (plus - minus) / (2.0 * FD_STEP);
        let diff = (a - numeric).abs();
        let floor = NOISE_ULPS * f64::EPSILON * (plus.abs() + minus.abs()) / FD_STEP;
        if diff <= floor {
            report.noise_limited += 1;
            continue;
        }
        let rel = diff / (a.abs() + numeric.abs()).max(1e-8);
        report.max_relative_error = report.max_relative_error.max(rel);
        if rel > tolerance {
            let (block, index) = names[j].clone();
            report.failures.push(GradCheckFailure {
                block,
                index,
                analytic: a,
                numeric,
                relative_error: rel,
            });
        }
    }
    Ok(report)
}

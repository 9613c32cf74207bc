//! JSON documents written by the command line.
//!
//! Infinite `beta` is written as the string `"inf"`; JSON has no infinity.

use l1cert_core::bounds::{GoodnessCertificate, Witness};
use l1cert_core::lower::KernelWitness;
use l1cert_core::recovery::{BoundUsed, RecoveryReport};
use l1cert_core::Beta;
use serde_json::{json, Value};

use crate::SCHEMA_VERSION;

pub fn beta_json(b: Beta) -> Value {
    if b.is_finite() {
        json!(b.value())
    } else {
        json!("inf")
    }
}

pub fn kernel_witness_json(w: &KernelWitness) -> Value {
    json!({
        "u_support": w.u.support(),
        "u_signs": w.u.signs(),
        "x": w.x,
        "value": w.value,
        "residual": w.residual,
    })
}

/// `{kind, s_certified, bound_value, beta, norm, tolerances, witness_file}`,
/// plus `s_upper` and the inline kernel witness for SCA results.
pub fn certificate_json(c: &GoodnessCertificate, witness_file: Option<&str>) -> Value {
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "kind": c.kind,
        "s_certified": c.s_certified,
        "bound_value": c.bound_value,
        "beta": beta_json(c.beta),
        "norm": c.norm,
        "tolerances": c.tolerances,
        "witness_file": witness_file,
    });
    if let Some(s) = c.s_upper {
        v["s_upper"] = json!(s);
    }
    if let Some(Witness::Kernel(w)) = &c.witness {
        v["witness"] = kernel_witness_json(w);
    }
    v
}

pub fn recovery_json(r: &RecoveryReport, seeds: Value) -> Value {
    let (bound_used, bound_value) = match r.bound {
        Some((BoundUsed::Noiseless, b)) => (json!("noiseless"), json!(b)),
        Some((BoundUsed::Noisy, b)) => (json!("noisy"), json!(b)),
        None => (Value::Null, Value::Null),
    };
    json!({
        "schema_version": SCHEMA_VERSION,
        "x_hat": r.x_hat,
        "residual": r.residual,
        "l1_error": r.l1_error,
        "linf_error": r.linf_error,
        "bound_used": bound_used,
        "bound_value": bound_value,
        "held": r.held,
        "seeds": seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use l1cert_core::bounds::s_bound_mu;
    use l1cert_core::SensingMatrix;

    #[test]
    fn certificate_fields() {
        let c = s_bound_mu(&SensingMatrix::identity(3)).unwrap();
        let v = certificate_json(&c, Some("y.txt"));
        assert_eq!(v["kind"], "mu");
        assert_eq!(v["s_certified"], 3);
        assert_eq!(v["norm"], "l2");
        assert_eq!(v["witness_file"], "y.txt");
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert!(v.get("s_upper").is_none());
        assert_eq!(beta_json(Beta::INFINITY), "inf");
    }
}

//! Interchangeable algorithm routes, looked up by name.

use crate::anderson::euler_factor_via_dual;
use crate::compact::CompactPlace;
use crate::error::{Error, Result};
use crate::lseries::{local_factor, LocalFactor};
use crate::ore::DrinfeldModel;
use crate::places::Place;
use crate::poly::Poly;
use crate::wieferich::{
    is_wieferich, is_wieferich_definition, ordic_valuation, ordic_valuation_by_definition, DualPlace, OrdicValuation,
};

/// Decides pi_x(phi;p) = pi_x(phi;p^2).
pub trait WieferichTest: Sync {
    fn name(&self) -> &'static str;
    fn is_wieferich(&self, model: &DrinfeldModel, p: &Place, x: &Poly) -> Result<bool>;
}

/// Computes the local factor at a place.
pub trait LocalFactorRoute: Sync {
    fn name(&self) -> &'static str;
    fn local_factor(&self, model: &DrinfeldModel, p: &Place) -> Result<LocalFactor>;
}

/// Computes c_p(phi; x).
pub trait OrdicRoute: Sync {
    fn name(&self) -> &'static str;
    fn ordic(&self, model: &DrinfeldModel, x: &Poly, p: &Place, c_max: u64) -> Result<OrdicValuation>;
}

struct Definition;
struct Fitting;
struct Krylov;
struct Compact;

impl WieferichTest for Definition {
    fn name(&self) -> &'static str {
        "definition"
    }
    fn is_wieferich(&self, model: &DrinfeldModel, p: &Place, x: &Poly) -> Result<bool> {
        Ok(is_wieferich_definition(model, p, x))
    }
}

impl WieferichTest for Fitting {
    fn name(&self) -> &'static str {
        "fitting"
    }
    fn is_wieferich(&self, model: &DrinfeldModel, p: &Place, x: &Poly) -> Result<bool> {
        Ok(is_wieferich(model, p, x))
    }
}

impl WieferichTest for Krylov {
    fn name(&self) -> &'static str {
        "krylov"
    }
    fn is_wieferich(&self, model: &DrinfeldModel, p: &Place, x: &Poly) -> Result<bool> {
        Ok(DualPlace::new(p).is_wieferich_krylov(model, x))
    }
}

impl WieferichTest for Compact {
    fn name(&self) -> &'static str {
        "compact"
    }
    fn is_wieferich(&self, model: &DrinfeldModel, p: &Place, x: &Poly) -> Result<bool> {
        let cp = CompactPlace::new(p)
            .ok_or_else(|| Error::ResourceLimit(format!("degree of {p} exceeds the compact representation")))?;
        Ok(cp.is_wieferich(&cp.model_residues(model), x.coeffs(), x.derivative().coeffs()))
    }
}

struct Determinant;
struct DualMotive;

impl LocalFactorRoute for Determinant {
    fn name(&self) -> &'static str {
        "determinant"
    }
    fn local_factor(&self, model: &DrinfeldModel, p: &Place) -> Result<LocalFactor> {
        Ok(local_factor(model, p))
    }
}

impl LocalFactorRoute for DualMotive {
    fn name(&self) -> &'static str {
        "dual"
    }
    fn local_factor(&self, model: &DrinfeldModel, p: &Place) -> Result<LocalFactor> {
        euler_factor_via_dual(model, p)
    }
}

struct Formula;
struct ByDefinition;

impl OrdicRoute for Formula {
    fn name(&self) -> &'static str {
        "formula"
    }
    fn ordic(&self, model: &DrinfeldModel, x: &Poly, p: &Place, c_max: u64) -> Result<OrdicValuation> {
        ordic_valuation(model, x, p, c_max)
    }
}

impl OrdicRoute for ByDefinition {
    fn name(&self) -> &'static str {
        "definition"
    }
    fn ordic(&self, model: &DrinfeldModel, x: &Poly, p: &Place, c_max: u64) -> Result<OrdicValuation> {
        Ok(ordic_valuation_by_definition(model, x, p, c_max))
    }
}

static WIEFERICH: [&dyn WieferichTest; 4] = [&Compact, &Krylov, &Fitting, &Definition];
static LOCAL_FACTOR: [&dyn LocalFactorRoute; 2] = [&Determinant, &DualMotive];
static ORDIC: [&dyn OrdicRoute; 2] = [&Formula, &ByDefinition];

fn lookup<T: ?Sized>(kind: &str, all: &[&'static T], name: &str, get: impl Fn(&T) -> &'static str) -> Result<&'static T> {
    all.iter().copied().find(|r| get(r) == name).ok_or_else(|| {
        let names: Vec<&str> = all.iter().map(|r| get(r)).collect();
        Error::InvalidArgument(format!("unknown {kind} method {name:?}; expected one of {}", names.join(", ")))
    })
}

pub fn wieferich_tests() -> &'static [&'static dyn WieferichTest] {
    &WIEFERICH
}

pub fn local_factor_routes() -> &'static [&'static dyn LocalFactorRoute] {
    &LOCAL_FACTOR
}

pub fn ordic_routes() -> &'static [&'static dyn OrdicRoute] {
    &ORDIC
}

pub fn wieferich_test(name: &str) -> Result<&'static dyn WieferichTest> {
    lookup("wieferich", &WIEFERICH, name, |r| r.name())
}

pub fn local_factor_route(name: &str) -> Result<&'static dyn LocalFactorRoute> {
    lookup("local factor", &LOCAL_FACTOR, name, |r| r.name())
}

pub fn ordic_route(name: &str) -> Result<&'static dyn OrdicRoute> {
    lookup("ordic", &ORDIC, name, |r| r.name())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fq;
    use crate::parse::parse_model;
    use crate::places::places_up_to;

    #[test]
    fn lookup_by_name() {
        assert_eq!(wieferich_test("krylov").unwrap().name(), "krylov");
        assert_eq!(local_factor_route("dual").unwrap().name(), "dual");
        assert!(ordic_route("nope").is_err());
    }

    #[test]
    fn wieferich_routes_agree() {
        let f = Fq::new(2).unwrap();
        let m = parse_model("t + (t^2+t)*tau + tau^2", &f).unwrap();
        let x = Poly::one(&f);
        for p in places_up_to(&f, 5).iter().filter(|p| p.satisfies_h()) {
            let answers: Vec<bool> = wieferich_tests().iter().map(|r| r.is_wieferich(&m, p, &x).unwrap()).collect();
            assert!(answers.windows(2).all(|w| w[0] == w[1]), "{p}: {answers:?}");
        }
    }
}

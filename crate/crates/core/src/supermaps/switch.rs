use num_complex::Complex64;

use super::multi::MultiSupermap;
use crate::channels::{Channel, ChannelSetSpec, Quantum};
use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, SystemType};

/// Labels of the switch's slots and target.
pub const SLOT1_IN: &str = "a1";
pub const SLOT1_OUT: &str = "a1'";
pub const SLOT2_IN: &str = "a2";
pub const SLOT2_OUT: &str = "a2'";
pub const SYSTEM: &str = "s";
pub const CONTROL: &str = "c";

/// Slot sets, target set, and body input/output types.
type SwitchTypes = (
    Vec<ChannelSetSpec<Quantum>>,
    ChannelSetSpec<Quantum>,
    SystemType,
    SystemType,
);

fn switch_types(d: usize) -> Result<SwitchTypes> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "switch on dimension {d} < 2"
        )));
    }
    let t = |l: &str| SystemType::single(l, d);
    let slots = vec![
        ChannelSetSpec::all(&t(SLOT1_IN)?, &t(SLOT1_OUT)?),
        ChannelSetSpec::all(&t(SLOT2_IN)?, &t(SLOT2_OUT)?),
    ];
    let b = SystemType::from_pairs(&[(SYSTEM, d), (CONTROL, 2)])?;
    let target = ChannelSetSpec::all(&b, &b);
    let body_in = SystemType::from_pairs(&[
        (&format!("{SLOT1_IN}*"), d),
        (SLOT1_OUT, d),
        (&format!("{SLOT2_IN}*"), d),
        (SLOT2_OUT, d),
    ])?;
    let body_out = b.dual().concat(&b)?;
    Ok((slots, target, body_in, body_out))
}

/// The two order branches as maps from the slots' Kraus vectors to the
/// output Kraus vector. Branch 0 runs slot 1 then slot 2, branch 1 the
/// reverse; each branch also fixes the control.
///
/// Kraus vectors are `|K⟩⟩[(i, o)] = K[o, i]`. Slot vectors are indexed
/// `(s1, m1)` and `(s2, m2)`; the output vector `((s, c), (t, c'))`.
fn branches(d: usize) -> [ComplexMatrix; 2] {
    let rows = d * 2 * d * 2;
    let cols = d * d * d * d;
    let one = Complex64::new(1.0, 0.0);
    let mut v = [
        ComplexMatrix::zeros(rows, cols),
        ComplexMatrix::zeros(rows, cols),
    ];
    let row = |s: usize, c: usize, t: usize| ((s * 2 + c) * d + t) * 2 + c;
    let col = |s1: usize, m1: usize, s2: usize, m2: usize| ((s1 * d + m1) * d + s2) * d + m2;
    for s in 0..d {
        for m in 0..d {
            for t in 0..d {
                // (B·A)[t, s] = Σ_m B[t, m] A[m, s]
                v[0].set(row(s, 0, t), col(s, m, m, t), one);
                // (A·B)[t, s] = Σ_m A[t, m] B[m, s]
                v[1].set(row(s, 1, t), col(m, t, s, m), one);
            }
        }
    }
    v
}

/// The quantum switch on a `d`-dimensional system: for slot Kraus operators
/// `Aᵢ`, `Bⱼ` the output has Kraus operators
/// `|0⟩⟨0| ⊗ BⱼAᵢ + |1⟩⟨1| ⊗ AᵢBⱼ` on system ⊗ control (control last).
pub fn switch_supermap(d: usize) -> Result<MultiSupermap<Quantum>> {
    let (slots, target, bi, bo) = switch_types(d)?;
    let [v0, v1] = branches(d);
    let body = Channel::from_kraus(&bi, &bo, &[&v0 + &v1])?;
    MultiSupermap::new(slots, target, body)
}

/// The switch without interference between the two orders: the control's
/// computational value selects the order.
pub fn classical_switch(d: usize) -> Result<MultiSupermap<Quantum>> {
    let (slots, target, bi, bo) = switch_types(d)?;
    let [v0, v1] = branches(d);
    let body = Channel::from_kraus(&bi, &bo, &[v0, v1])?;
    MultiSupermap::new(slots, target, body)
}

/// State of the control after the switch acts on `(phi1, phi2)` with the
/// system and control prepared in `rho_s` and `rho_c`.
pub fn control_output(
    switch: &MultiSupermap<Quantum>,
    phi1: &ComplexMatrix,
    phi2: &ComplexMatrix,
    rho_s: &ComplexMatrix,
    rho_c: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let d = rho_s.rows();
    let ch = |u: &ComplexMatrix, i: &str, o: &str| {
        Channel::from_kraus(
            &SystemType::single(i, d)?,
            &SystemType::single(o, d)?,
            std::slice::from_ref(u),
        )
    };
    let out = switch.apply(&[
        ch(phi1, SLOT1_IN, SLOT1_OUT)?,
        ch(phi2, SLOT2_IN, SLOT2_OUT)?,
    ])?;
    let input = Channel::state(
        &out.in_type().select(&[SYSTEM, CONTROL])?,
        &crate::tensor::kron(rho_s, rho_c),
    )?;
    Channel::link(&input, &out)?
        .discard_outputs(&[SYSTEM])?
        .state_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use crate::tensor::gates::*;
    use crate::tensor::kron;

    fn kraus_channel(k: &[ComplexMatrix], i: &str, o: &str, d: usize) -> Channel {
        Channel::from_kraus(
            &SystemType::single(i, d).unwrap(),
            &SystemType::single(o, d).unwrap(),
            k,
        )
        .unwrap()
    }

    /// Switched channel built from explicit Kraus operators.
    fn kraus_switch(a: &[ComplexMatrix], b: &[ComplexMatrix], d: usize, coherent: bool) -> Channel {
        let p0 = basis_projector(2, 0);
        let p1 = basis_projector(2, 1);
        let mut ks = Vec::new();
        for ai in a {
            for bj in b {
                let k0 = kron(&(bj * ai), &p0);
                let k1 = kron(&(ai * bj), &p1);
                if coherent {
                    ks.push(&k0 + &k1);
                } else {
                    ks.push(k0);
                    ks.push(k1);
                }
            }
        }
        let t = SystemType::from_pairs(&[(SYSTEM, d), (CONTROL, 2)]).unwrap();
        Channel::from_kraus(&t, &t, &ks).unwrap()
    }

    fn random_kraus(d: usize, seed: u64) -> Vec<ComplexMatrix> {
        let v = crate::channels::random_isometry(d, 2 * d, &mut rng_from(seed));
        (0..2)
            .map(|e| ComplexMatrix::from_fn(d, d, |o, i| v.get(o * 2 + e, i)))
            .collect()
    }

    #[test]
    fn matches_kraus_construction() {
        for d in [2, 3] {
            let s = switch_supermap(d).unwrap();
            let c = classical_switch(d).unwrap();
            for seed in 0..3 {
                let a = random_kraus(d, seed);
                let b = random_kraus(d, 10 + seed);
                let fills = [
                    kraus_channel(&a, SLOT1_IN, SLOT1_OUT, d),
                    kraus_channel(&b, SLOT2_IN, SLOT2_OUT, d),
                ];
                let out = s.apply(&fills).unwrap();
                assert!(out.distance(&kraus_switch(&a, &b, d, true)).unwrap() < 1e-10);
                assert!(out.is_deterministic());
                let out = c.apply(&fills).unwrap();
                assert!(out.distance(&kraus_switch(&a, &b, d, false)).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn anticommuting_paulis_flip_the_control() {
        let s = switch_supermap(2).unwrap();
        let mixed = ComplexMatrix::identity(2).scale(0.5.into());
        let out = control_output(&s, &pauli_x(), &pauli_z(), &mixed, &plus_state()).unwrap();
        assert!(out.distance(&minus_state()) < 1e-10);
        let c = classical_switch(2).unwrap();
        let out = control_output(&c, &pauli_x(), &pauli_z(), &mixed, &plus_state()).unwrap();
        assert!(out.distance(&mixed) < 1e-10);
    }

    #[test]
    fn equal_unitaries_leave_control_untouched() {
        let s = switch_supermap(2).unwrap();
        let u = hadamard();
        let rho = basis_projector(2, 0);
        let out = control_output(&s, &u, &u, &rho, &plus_state()).unwrap();
        assert!(out.distance(&plus_state()) < 1e-10);
    }

    #[test]
    fn rejects_trivial_dimension() {
        assert!(switch_supermap(1).is_err());
        assert!(classical_switch(0).is_err());
    }
}

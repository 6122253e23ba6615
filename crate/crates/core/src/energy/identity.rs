//! Localized energy balance of one dyadic block.
//!
//! For `E_j = ½(‖η_j‖² + εb‖∇η_j‖² + ‖V_j‖² + εd‖∇V_j‖²)` the flat-bottom
//! flow gives
//! `dE_j/dt = −aε∫η_j divΔV_j − cε∫V_j·∇Δη_j − ε∫η η_j divV_j + T₁`,
//! `T₁ = ε/2∫divV(η_j² + |V_j|²) + ε∫R₁ⱼη_j + ε∫R₂ⱼ·V_j`, with
//! `R₁ⱼ = [W,Δ_j]∇η + [V,Δ_j]∇η + [η,Δ_j]divV` and
//! `R₂ⱼ = [W,Δ_j]∇V + [V,Δ_j]∇V − ½∇Δ_j|W|² − Δ_j(∇W V)`.
//! Commutators are `[A,Δ_j]f = A·Δ_j f − Δ_j(A f)` and
//! `(∇X Y)_k = Σ_l ∂_k X^l Y^l`.

use serde::Serialize;

use crate::error::Result;
use crate::field::{Field, VectorField};
use crate::littlewood_paley::DyadicPartition;
use crate::model::{AbcdParams, WaveState};
use crate::spectral::{derivative, divergence, gradient, inner_product_l2, inner_product_vec, laplacian};

/// The terms of the block balance at one instant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlockIdentity {
    pub j: i32,
    pub energy: f64,
    pub dispersive_a: f64,
    pub dispersive_c: f64,
    pub transport: f64,
    pub t1: f64,
    /// Sum of the four terms, the predicted `dE_j/dt`.
    pub rate: f64,
}

/// `E_j = ½(‖η_j‖² + εb‖∇η_j‖² + ‖V_j‖² + εd‖∇V_j‖²)`.
pub fn block_energy(p: &DyadicPartition, st: &WaveState, params: &AbcdParams, j: i32) -> Result<f64> {
    let eta_j = p.dyadic_block(&st.eta, j)?;
    let v_j = p.dyadic_block_vec(&st.v, j)?;
    Ok(local_energy(&eta_j, &v_j, params))
}

fn local_energy(eta_j: &Field, v_j: &VectorField, params: &AbcdParams) -> f64 {
    let e = params.epsilon;
    let grad_v: f64 = v_j.components().iter().map(|c| gradient(c).norm_l2().powi(2)).sum();
    0.5 * (eta_j.norm_l2().powi(2)
        + e * params.b * gradient(eta_j).norm_l2().powi(2)
        + v_j.norm_l2().powi(2)
        + e * params.d * grad_v)
}

fn commutator(p: &DyadicPartition, a: &Field, f: &Field, j: i32) -> Result<Field> {
    let mut out = a.mul(&p.dyadic_block(f, j)?)?;
    out.axpy(-1.0, &p.dyadic_block(&a.mul(f)?, j)?)?;
    Ok(out)
}

/// Evaluate every term of the block balance for block `j`.
pub fn block_identity(p: &DyadicPartition, st: &WaveState, params: &AbcdParams, j: i32) -> Result<BlockIdentity> {
    params.require_evolvable()?;
    let e = params.epsilon;
    let n = st.grid().dim();
    let eta = &st.eta;
    let v = &st.v;
    let w = &st.w;
    let use_w = !w.is_zero();

    let eta_j = p.dyadic_block(eta, j)?;
    let v_j = p.dyadic_block_vec(v, j)?;
    let div_v = divergence(v);
    let div_vj = divergence(&v_j);

    let dispersive_a = -params.a * e * inner_product_l2(&eta_j, &laplacian(&div_vj))?;
    let dispersive_c = -params.c * e * inner_product_vec(&v_j, &gradient(&laplacian(&eta_j)))?;
    let transport = -e * inner_product_l2(eta, &eta_j.mul(&div_vj)?)?;

    let mut sq = eta_j.mul(&eta_j)?;
    sq.axpy(1.0, &v_j.magnitude_sq())?;
    let mut t1 = 0.5 * e * inner_product_l2(&div_v, &sq)?;

    let grad_eta = gradient(eta);
    let grad_v: Vec<VectorField> = v.components().iter().map(gradient).collect();

    let mut r1 = commutator(p, eta, &div_v, j)?;
    for l in 0..n {
        r1.axpy(1.0, &commutator(p, &v.components()[l], &grad_eta.components()[l], j)?)?;
        if use_w {
            r1.axpy(1.0, &commutator(p, &w.components()[l], &grad_eta.components()[l], j)?)?;
        }
    }
    t1 += e * inner_product_l2(&r1, &eta_j)?;

    let w_sq_j = if use_w {
        Some(p.dyadic_block(&w.magnitude_sq(), j)?)
    } else {
        None
    };
    let mut r2 = Vec::with_capacity(n);
    for k in 0..n {
        let mut rk = Field::zeros(st.grid());
        for (l, grad_vl) in grad_v.iter().enumerate() {
            // ∂_k V^l
            let dkv = &grad_vl.components()[k];
            rk.axpy(1.0, &commutator(p, &v.components()[l], dkv, j)?)?;
            if use_w {
                rk.axpy(1.0, &commutator(p, &w.components()[l], dkv, j)?)?;
            }
        }
        if let Some(ws) = &w_sq_j {
            rk.axpy(-0.5, &derivative(ws, k))?;
            let mut gwv = Field::zeros(st.grid());
            for l in 0..n {
                let dkw = derivative(&w.components()[l], k);
                gwv.axpy(1.0, &dkw.mul(&v.components()[l])?)?;
            }
            rk.axpy(-1.0, &p.dyadic_block(&gwv, j)?)?;
        }
        r2.push(rk);
    }
    t1 += e * inner_product_vec(&VectorField::new(r2)?, &v_j)?;

    Ok(BlockIdentity {
        j,
        energy: local_energy(&eta_j, &v_j, params),
        dispersive_a,
        dispersive_c,
        transport,
        t1,
        rate: dispersive_a + dispersive_c + transport + t1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::model::{rhs, validate_params};
    use crate::spectral::helmholtz_apply;

    /// `dE_j/dt` evaluated directly from the right-hand side.
    fn direct_rate(p: &DyadicPartition, st: &WaveState, params: &AbcdParams, j: i32) -> f64 {
        let t = rhs(st, params, None).unwrap();
        let e = params.epsilon;
        let eta_j = p.dyadic_block(&st.eta, j).unwrap();
        let v_j = p.dyadic_block_vec(&st.v, j).unwrap();
        let deta_j = p.dyadic_block(&t.eta, j).unwrap();
        let dv_j = p.dyadic_block_vec(&t.v, j).unwrap();
        let mut acc = inner_product_l2(&eta_j, &helmholtz_apply(&deta_j, e * params.b)).unwrap();
        for (a, b) in v_j.components().iter().zip(dv_j.components()) {
            acc += inner_product_l2(a, &helmholtz_apply(b, e * params.d)).unwrap();
        }
        acc
    }

    fn check(n_dim: usize, with_w: bool, params: AbcdParams) {
        let l = 2.0 * std::f64::consts::PI * 4.0;
        let spec = if n_dim == 1 {
            GridSpec::one_d(128, l)
        } else {
            GridSpec::two_d(64, l)
        };
        let g = spec.unwrap().build().unwrap();
        let p = DyadicPartition::build(&g).unwrap();
        // band-limited well inside the two-thirds box so every product is exact
        let k_max = 0.2 * g.spec().dealias_radius();
        let eta = Field::random_band_limited(&g, k_max, 0.8, 1);
        let v = gradient(&Field::random_band_limited(&g, k_max, 0.8, 2));
        let w = if with_w {
            if n_dim == 1 {
                VectorField::new(vec![Field::from_fn(&g, |_| 0.7)]).unwrap()
            } else {
                let psi = gradient(&Field::random_band_limited(&g, k_max, 0.8, 3));
                let mut first = psi.components()[1].clone();
                first.scale(-1.0);
                VectorField::new(vec![first, psi.components()[0].clone()]).unwrap()
            }
        } else {
            VectorField::zeros(&g)
        };
        let st = WaveState::new(eta, v, w, 0.0).unwrap();
        for j in [-1, 0, 1] {
            let id = block_identity(&p, &st, &params, j).unwrap();
            let direct = direct_rate(&p, &st, &params, j);
            let scale = direct.abs().max(1e-3 * id.energy);
            assert!(
                (id.rate - direct).abs() <= 1e-9 * scale,
                "j={j}: {} vs {direct}",
                id.rate
            );
        }
    }

    #[test]
    fn matches_direct_rate_1d() {
        check(1, false, AbcdParams::preset("bbm-bbm", 0.2).unwrap());
        check(
            1,
            true,
            validate_params(-0.1, 0.2, -0.05, 1.0 / 3.0 - 0.05, 0.3).unwrap(),
        );
    }

    #[test]
    fn matches_direct_rate_2d_with_forcing() {
        check(
            2,
            true,
            validate_params(-0.1, 0.2, -0.05, 1.0 / 3.0 - 0.05, 0.3).unwrap(),
        );
    }
}

use proptest::prelude::*;

use crate::state::{DensityMatrix, Matrix4c, C64};

/// `G G† / tr(G G†)` for a random complex `G`, optionally restricted in rank.
pub(crate) fn arb_density_matrix() -> impl Strategy<Value = DensityMatrix> {
    (prop::array::uniform32(-1.0..1.0f64), 1usize..=4).prop_map(|(xs, rank)| {
        let mut g = Matrix4c::zeros();
        for i in 0..4 {
            for j in 0..rank {
                g[(i, j)] = C64::new(xs[8 * i + 2 * j], xs[8 * i + 2 * j + 1]);
            }
        }
        let m = g * g.adjoint();
        let tr = m.trace().re.max(1e-300);
        DensityMatrix::from_matrix(m.unscale(tr)).expect("random state is valid")
    })
}

/// Random state in the span of `|1,0,g⟩, |0,0,e⟩, |0,0,g⟩`: the support a
/// post-pulse protocol state can have.
pub(crate) fn arb_post_pulse_state() -> impl Strategy<Value = DensityMatrix> {
    arb_density_matrix().prop_map(|rho| {
        let mut m = *rho.matrix();
        for j in 0..4 {
            m[(1, j)] = C64::new(0.0, 0.0);
            m[(j, 1)] = C64::new(0.0, 0.0);
        }
        let tr = m.trace().re;
        if tr < 1e-6 {
            DensityMatrix::vacuum()
        } else {
            DensityMatrix::from_matrix(m.unscale(tr)).expect("projected state is valid")
        }
    })
}

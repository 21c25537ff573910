//! The convention sheet: every sign and normalization that is a choice.
//!
//! Reports embed a hash of [`ConventionSheet::to_json`], so changing any entry
//! here changes the provenance of every downstream artifact.

use serde::{Deserialize, Serialize};

use crate::asymptotics::ORDER_TWO_TOL;
use crate::hitchin::REDUCTION_CONSTANTS;
use crate::moduli::complex_structures;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionSheet {
    pub coordinates: String,
    pub orthonormal_frame: String,
    pub orientation: String,
    pub self_dual_basis: [String; 3],
    pub self_dual_norm: String,
    pub norm: String,
    pub curvature: String,
    pub hitchin_lift: String,
    pub reduction_constants: (f64, f64),
    pub reduction_identity: String,
    pub semisimple_model: String,
    pub nilpotent_model: String,
    pub twist_parameter: String,
    pub dual_lattice: String,
    pub dual_torus_coordinates: String,
    pub holonomy: String,
    pub residue_units: String,
    pub canonicalization: String,
    pub order_two_tolerance: f64,
    pub parabolic_degree: String,
    pub complex_structures: [[[i8; 4]; 4]; 3],
    pub quaternion_relations: String,
}

impl ConventionSheet {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("convention sheet serializes")
    }
}

fn s(x: &str) -> String {
    x.to_string()
}

pub fn convention_sheet() -> ConventionSheet {
    let cs = complex_structures();
    let complex_structures = std::array::from_fn(|j| std::array::from_fn(|r| std::array::from_fn(|c| cs[j][(r, c)] as i8)));
    ConventionSheet {
        coordinates: s("(r, theta, x, y), w = r e^{i theta}, (x, y) periodic with periods (L_x, L_y)"),
        orthonormal_frame: s("(d_x, d_y, d_r, r^-1 d_theta)"),
        orientation: s("dx ^ dy ^ dw1 ^ dw2"),
        self_dual_basis: [s("F12 + F34"), s("F13 - F24"), s("F14 + F23")],
        self_dual_norm: s("|F+|^2 = (|C1|^2 + |C2|^2 + |C3|^2) / 2"),
        norm: s("Frobenius, |F|^2 = sum_{i<j} |F_ij|^2 in the orthonormal frame"),
        curvature: s("F_mn = d_m A_n - d_n A_m + [A_m, A_n]"),
        hitchin_lift: s("psi_w = (A_x + i A_y)/2; A_x = psi - psi^dagger, A_y = -i (psi + psi^dagger)"),
        reduction_constants: REDUCTION_CONSTANTS,
        reduction_identity: s("|F+|^2 = c1 h1^2 + c2 h2^2, h1 = |F_B + [psi, psi^dagger]| (dw1^dw2 coefficient), h2 = |dbar_B psi|"),
        semisimple_model: s("B = d + i alpha H dtheta, psi_w = i (lambda + mu/w) H, H = diag(1, -1); a_x + i a_y = 2 lambda + 2 mu / w"),
        nilpotent_model: s("L = 2 ln r, b_theta = diag_i(-1/L), psi_w = E / (w L), E = [[0,1],[0,0]]; needs r > 1"),
        twist_parameter: s("mode (n, m) of dbar + zeta has symbol (i k_n - k_m)/2 + zeta, k_n = 2 pi n / L_x, k_m = 2 pi m / L_y"),
        dual_lattice: s("zeta lattice basis {pi / L_y, i pi / L_x}"),
        dual_torus_coordinates: s("xi_j = lambda_j L_j / (2 pi) mod 1, zeta(xi) = (-lambda_2 + i lambda_1)/2; the model has zeta(w) = i (lambda + mu / w)"),
        holonomy: s("h' = -A(gamma') h, later steps multiply on the left"),
        residue_units: s("mu is reported in model units; zeta units carry mu_zeta = i mu"),
        canonicalization: s(
            "Weyl flip (xi0, alpha, mu) -> (-xi0, -alpha, -mu): xi0 lexicographically minimal; if xi0 is order two, alpha > 0; if also alpha in {0, -1/2}, Re mu > 0 or (Re mu = 0 and Im mu >= 0)",
        ),
        order_two_tolerance: ORDER_TWO_TOL,
        parabolic_degree: s("deg_alpha L = d_inf + alpha area (L|_inf in L_{-xi0}) or d_inf - alpha area (L|_inf in L_{xi0})"),
        complex_structures,
        quaternion_relations: s("I_j^2 = -Id, I1 I2 = I3, I1 I2 I3 = -Id"),
    }
}

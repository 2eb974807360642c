use proptest::prelude::*;

use nfepm_core::channel::{
    general_channel, nf_channel, nf_channel_axis, rerr, scaling_factor, simp_channel, vector_field, ObservationPoint, PoseGeneral,
    RerrKind,
};
use nfepm_core::ecrb::{ecrb, fim_closed, ExpectationGrid, SingularPolicy};
use nfepm_core::geometry::{fraunhofer_distance, fresnel_distance, phase_ambiguity_distance, spacing_constraint_distance};
use nfepm_core::numerics::q_function;
use nfepm_core::solver::{decouple, solve_case2_sc};
use nfepm_core::zzb::{ambiguity_function, channel_difference, p_min, zzb_t_curve, zzb_z_curve, HypothesisPair, ZzbGrid};
use nfepm_core::{ArrayGeometry, PoseCpl, PriorUniform, Wave};

fn unit(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 1e-3).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

proptest! {
    #[test]
    fn field_is_transverse(
        t in prop::array::uniform3(-1.0f64..1.0),
        x_t in -1.0f64..1.0, y_t in -1.0f64..1.0, z_t in 0.05f64..10.0,
        x_r in -1.0f64..1.0, y_r in -1.0f64..1.0, lambda in 0.001f64..1.0,
    ) {
        let Some(t) = unit(t) else { return Ok(()) };
        let pose = PoseGeneral::new([x_t, y_t, z_t], t).unwrap();
        let e = vector_field(&pose, &ObservationPoint { x_r, y_r }, &Wave::new(lambda, 1.0).unwrap()).unwrap();
        let r = [x_r - x_t, y_r - y_t, -z_t];
        let dot = e[0] * r[0] + e[1] * r[1] + e[2] * r[2];
        let en = (e[0].norm_sqr() + e[1].norm_sqr() + e[2].norm_sqr()).sqrt();
        let rn = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        prop_assert!(dot.norm() <= 1e-12 * en * rn);
    }

    #[test]
    fn reduction_chain(z in 0.05f64..10.0, tz in 0.0f64..0.999, x in -1.0f64..1.0, y in -2.0f64..2.0, lambda in 0.001f64..1.0) {
        let w = Wave::new(lambda, 1.0).unwrap();
        let p = PoseCpl::new(z, tz).unwrap();
        let g = general_channel(&p.to_general(), &ObservationPoint { x_r: x, y_r: y }, &w).unwrap();
        let h = nf_channel(&p, x, y, &w).unwrap();
        prop_assert!((g - h).norm() <= 1e-12 * h.norm());
        if y * tz + z * p.t_y() >= 0.0 {
            let ha = nf_channel(&p, 0.0, y, &w).unwrap();
            prop_assert!((ha - nf_channel_axis(&p, y, &w)).norm() <= 1e-12 * ha.norm());
        }
    }

    #[test]
    fn phase_law_and_simp_dominates(z in 0.05f64..10.0, tz in 0.0f64..0.999, y in 0.0f64..2.0, lambda in 0.001f64..1.0) {
        let w = Wave::new(lambda, 1.0).unwrap();
        let p = PoseCpl::new(z, tz).unwrap();
        let h = nf_channel_axis(&p, y, &w);
        let r = (y * y + z * z).sqrt();
        let d = decouple(h);
        let expected = (w.k() * r).rem_euclid(2.0 * std::f64::consts::PI);
        let diff = (d.theta - expected).abs();
        prop_assert!(diff < 1e-9 || (2.0 * std::f64::consts::PI - diff) < 1e-9);
        prop_assert!(simp_channel(&p, 0.0, y, &w).unwrap().norm() >= h.norm());
        let e = rerr(RerrKind::Nfem, &p, 0.0, y, &w).unwrap();
        prop_assert!((e - (1.0 - 1.0 / scaling_factor(r, &w))).abs() < 1e-12);
    }

    #[test]
    fn ambiguity_function_identity(
        z in 0.1f64..10.0, th in 0.0f64..0.9, dz in 0.0f64..2.0, frac in 0.0f64..1.0, y in 0.0f64..5.0, lambda in 0.001f64..1.0,
    ) {
        let w = Wave::new(lambda, 1.0).unwrap();
        let pair = HypothesisPair::new(z, th, dz, (0.999 - th) * frac).unwrap();
        let a = ambiguity_function(&pair, y, &w);
        let b = channel_difference(&pair, y, &w);
        let s = nf_channel_axis(&pair.h0(), y, &w).norm_sqr() + nf_channel_axis(&pair.h1(), y, &w).norm_sqr();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-10 * s);
    }

    #[test]
    fn distance_ordering(d_r in 0.1f64..10.0, ratio in 4.8f64..200.0) {
        let geom = ArrayGeometry::new(d_r, d_r / 4.0).unwrap();
        let w = Wave::new(d_r / ratio, 1.0).unwrap();
        let pa = phase_ambiguity_distance(&geom, &w).unwrap();
        prop_assert!(fresnel_distance(&geom, &w) < pa);
        prop_assert!(pa < fraunhofer_distance(&geom, &w));
    }

    #[test]
    fn integer_period_law(d_r in 0.5f64..5.0, ratio in 4.8f64..100.0, n in 4usize..80, stretch in 1.0f64..5.0) {
        let lambda = d_r / ratio;
        let geom = ArrayGeometry::new(d_r, d_r / n as f64).unwrap();
        let w = Wave::new(lambda, 1.0).unwrap();
        let ys = geom.element_centers().unwrap();
        let r = |z: f64, y: f64| (z * z + y * y).sqrt();
        let z = phase_ambiguity_distance(&geom, &w).unwrap() * stretch;
        for &y in &ys[1..] {
            prop_assert!(r(z, y) - r(z, ys[0]) < lambda);
        }
        let z = spacing_constraint_distance(&geom, &w) * stretch;
        prop_assert!(r(z, ys[1]) - r(z, ys[0]) < lambda);
    }

    #[test]
    fn sc_solver_near_truth(stretch in 1.5f64..20.0, tz in 0.0f64..0.95) {
        let geom = ArrayGeometry::new(1.0, 0.05).unwrap();
        let w = Wave::new(0.1, 1.0).unwrap();
        let z = spacing_constraint_distance(&geom, &w) * stretch;
        let p = PoseCpl::new(z, tz).unwrap();
        let (v1, v2) = (0.05 * nf_channel_axis(&p, 0.025, &w), 0.05 * nf_channel_axis(&p, 0.075, &w));
        let r = solve_case2_sc(v1, v2, &geom, &w).unwrap();
        // Paraxial period rule: leading error (y1² + y2²) / (4 z²).
        prop_assert!((r.z_hat.re - z).abs() / z < 0.5 * (0.075 / z).powi(2));
    }

    #[test]
    fn fim_is_psd_and_linear_in_snr(z in 0.2f64..20.0, tz in 0.0f64..0.999, d_r in 0.01f64..20.0, lambda in 0.001f64..1.0, snr in 1e-3f64..1e6) {
        let geom = ArrayGeometry::new(d_r.max(0.01), 0.01).unwrap();
        let w = Wave::new(lambda, 1.0).unwrap();
        let p = PoseCpl::new(z, tz).unwrap();
        let f = fim_closed(&p, snr, &geom, &w).unwrap();
        prop_assert!(f.f_zz > 0.0 && f.f_tt > 0.0);
        prop_assert!(f.det() >= -1e-12 * f.f_zz * f.f_tt);
        let g = fim_closed(&p, 2.0 * snr, &geom, &w).unwrap();
        prop_assert_eq!(g.f_tt, 2.0 * f.f_tt);
    }

    #[test]
    fn q_symmetry_and_p_min_range(x in -30.0f64..30.0, mu in 0.0f64..1e4) {
        prop_assert!((q_function(x) + q_function(-x) - 1.0).abs() < 1e-14);
        let p = p_min(mu);
        prop_assert!((0.0..=0.5).contains(&p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn zzb_monotone_and_below_prior(h1 in 2.0f64..5.0, width in 0.2f64..2.0, lambda in 0.05f64..0.5) {
        let prior = PriorUniform::new(h1, h1 + width).unwrap();
        let geom = ArrayGeometry::new(3.0, 0.1).unwrap();
        let w = Wave::new(lambda, 1.0).unwrap();
        let grid = ZzbGrid::new(16, 8, 8, 4).unwrap();
        let snrs = [0.1, 10.0, 1e3, 1e5];
        let z = zzb_z_curve(&prior, &snrs, &geom, &w, &grid).unwrap();
        let t = zzb_t_curve(&prior, &snrs, &geom, &w, &grid).unwrap();
        for i in 0..snrs.len() {
            prop_assert!(z[i] <= width * width / 12.0 * (1.0 + 1e-6));
            prop_assert!(t[i] <= 1.0 / 12.0 * (1.0 + 1e-6));
            if i > 0 {
                prop_assert!(z[i] <= z[i - 1] && t[i] <= t[i - 1]);
            }
        }
    }

    #[test]
    fn ecrb_scaling_is_exact(h1 in 1.0f64..5.0, width in 0.2f64..2.0, snr in 1.0f64..1e5) {
        let prior = PriorUniform::new(h1, h1 + width).unwrap();
        let geom = ArrayGeometry::new(3.0, 0.1).unwrap();
        let w = Wave::new(0.05, 1.0).unwrap();
        let g = ExpectationGrid { n_z: 8, n_t: 8, eps: 1e-4 };
        let a = ecrb(&prior, snr, &geom, &w, &g, SingularPolicy::Error).unwrap();
        let b = ecrb(&prior, 10.0 * snr, &geom, &w, &g, SingularPolicy::Error).unwrap();
        prop_assert!((a.z / b.z - 10.0).abs() < 1e-12);
        prop_assert!((a.t / b.t - 10.0).abs() < 1e-12);
    }
}

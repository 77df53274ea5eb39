use super::*;
use crate::chanmodel::{draw_channel_set, stream_rng, ChannelConfig};

fn instance(seed: u64, n: usize, m: usize) -> ChannelSet {
    let cfg = ChannelConfig::default_for(n);
    draw_channel_set(&mut stream_rng(seed, 0), &mut stream_rng(seed, 1), &cfg, m).unwrap()
}

#[test]
fn taylor_tangent_values() {
    let (a, b) = taylor_lower_bound(0.0);
    assert_eq!((a, b), (1.0, 1.0));
    let (a, b) = taylor_lower_bound(1.3);
    assert!((a * 1.3 + b - 1.3f64.exp()).abs() < 1e-14);
}

#[test]
fn init_point_uses_full_budget() {
    let ch = instance(3, 3, 4);
    let budget = PowerBudget::from_db(20.0, 30.0);
    let cfg = ScaConfig::new(3, 0.5);
    let p = init_linearization(&ch, &budget, &cfg).unwrap();
    let sat: f64 = p.w.iter().map(trace_re).sum();
    assert!((sat - budget.p_s).abs() < 1e-9 * budget.p_s);
    for f in &p.f {
        assert!((trace_re(f) - budget.p_b).abs() < 1e-9 * budget.p_b);
    }
    for (k, a) in p.anchors.iter().enumerate() {
        let g = ch.grams(k);
        let expect: f64 = (0..3).filter(|i| *i != k).map(|i| crate::linalg::trace_prod(&g.h_su, &p.w[i])).sum::<f64>()
            + crate::linalg::trace_prod(&g.g_su, &p.f[k])
            + 1.0;
        assert!((a[0].exp() - expect).abs() < 1e-9 * expect);
    }
}

#[test]
fn p2_row_counts() {
    let ch = instance(5, 3, 4);
    let budget = PowerBudget::from_db(20.0, 30.0);
    let cfg = ScaConfig::new(3, 0.5);
    let p = init_linearization(&ch, &budget, &cfg).unwrap();
    let prog = build_p2(&ch, &p, &budget, &cfg).unwrap();
    use crate::conic::Cone;
    assert_eq!(prog.cones[0], Cone::NonNeg(1 + 3 + 3 * 3 + 3));
    assert_eq!(prog.cones[1], Cone::Exp(12));
    assert_eq!(prog.cones.iter().filter(|c| matches!(c, Cone::Psd(_))).count(), 6);
    assert_eq!(prog.var_names.len(), prog.n);
    assert!(prog.var_index("W0[0]").is_some() && prog.var_index("alpha2").is_some());
}

#[test]
fn extract_examples() {
    use crate::linalg::{gram, C64};
    let v = CVec::from_vec(vec![C64::new(0.0, 1.0), C64::new(2.0, -1.0)]);
    let (u, metric) = extract_rank_one(&gram(&v));
    assert!((metric - 1.0).abs() < 1e-12);
    assert!((gram(&u) - gram(&v)).norm() < 1e-12);
    let half = CMat::identity(2, 2).scale(0.5);
    assert!((extract_rank_one(&half).1 - 0.5).abs() < 1e-12);
    let (z, m) = extract_rank_one(&CMat::zeros(3, 3));
    assert_eq!((z.norm(), m), (0.0, 1.0));
}

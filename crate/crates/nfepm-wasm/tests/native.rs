use nfepm_wasm::{channel_profile_rows, ecrb_curve_rows, solve_rows};

#[test]
fn channel_profile_shape_and_ordering() {
    let rows = channel_profile_rows(0.01, 0.5f64.sqrt(), 0.1, 0.01, 1.0, 20).unwrap();
    assert_eq!(rows.len(), 6 * 20);
    for r in rows.chunks(6) {
        assert!(r[1] > 0.0);
        assert!(r[2] < r[3] && r[2] < r[4] && r[2] < r[5]);
    }
    assert!(channel_profile_rows(0.01, 0.5, 0.1, 1.0, 0.5, 20).is_err());
}

#[test]
fn ecrb_curve_scales_with_snr() {
    let rows = ecrb_curve_rows(0.1, 5.0, 0.1, 3.0, 5.0, 20.0, 40.0, 3).unwrap();
    assert_eq!(rows.len(), 12);
    assert!((rows[1] / rows[5] - 10.0).abs() < 1e-9);
    assert!(rows[2] >= rows[3]);
    assert!(ecrb_curve_rows(0.1, 5.0, 0.1, 5.0, 3.0, 20.0, 40.0, 3).unwrap_err().contains("H1 < H2"));
}

#[test]
fn solve_recovers_case1_pose() {
    let r = solve_rows(1.0, 0.5, 0.05, 0.5, 0.9, 0.7, 0.3).unwrap();
    assert_eq!(r[0], 1.0);
    assert!((r[1] - 0.7).abs() < 1e-10 && r[2] == 0.0);
    assert!((r[3] - 0.3).abs() < 1e-10);
    let pa = solve_rows(0.1, 1.0, 0.05, 5.0, 20.0, 10.0, 0.5).unwrap();
    assert_eq!(pa[0], 2.0);
    assert!((pa[1] - 10.0).abs() < 0.05);
}

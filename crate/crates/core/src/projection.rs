/// Radial projection of `v` onto the closed ball `B_radius(center)`.
///
/// Points inside the ball are returned unchanged; `radius = ∞` disables the
/// projection.
pub fn project_ball(v: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    debug_assert_eq!(v.len(), center.len());
    if radius.is_infinite() {
        return v.to_vec();
    }
    let dist = v.iter().zip(center).map(|(x, c)| (x - c).powi(2)).sum::<f64>().sqrt();
    if dist <= radius {
        return v.to_vec();
    }
    let scale = radius / dist;
    let mut out: Vec<f64> = v.iter().zip(center).map(|(x, c)| c + scale * (x - c)).collect();
    // Guard against the rescaled point landing an ulp outside the ball. The
    // margin doubles each pass so the update always survives rounding
    // against a large center.
    let mut margin = f64::EPSILON;
    loop {
        let d = out.iter().zip(center).map(|(x, c)| (x - c).powi(2)).sum::<f64>().sqrt();
        if d <= radius {
            break;
        }
        let shrink = (radius / d) * (1.0 - margin);
        margin = (2.0 * margin).min(0.5);
        for (x, c) in out.iter_mut().zip(center) {
            *x = c + shrink * (*x - c);
        }
    }
    out
}

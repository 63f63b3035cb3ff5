use adaptq_core::curvature::*;
use adaptq_core::qlearn::GridSpec;
use std::time::Instant;

fn main() {
    let grid = GridSpec::Full.points();
    let t0 = Instant::now();
    let cfg = CurvatureDatasetConfig {
        max_span_angle: 4.2,
        substeps: 150,
        windows_per_node: 8,
        ..CurvatureDatasetConfig::default()
    };
    let data = generate_curvature_dataset(&grid, &cfg).unwrap();
    let gen_t = t0.elapsed();
    let fit_cfg = FitConfig {
        rmse_bar: 1.0,
        hidden: vec![96, 96],
        epochs: 350,
        ..FitConfig::default()
    };
    let est = fit_curvature_estimator(&data, &fit_cfg).unwrap();
    println!(
        "windows={} rmse={:.5} (gen {:.0?} total {:.0?})",
        data.len(), est.holdout_rmse.unwrap(), gen_t, t0.elapsed()
    );
}

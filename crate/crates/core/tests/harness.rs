use iadas::channel::{
    build_geometry, draw_das_channels, hexagon_contains, ChannelSet, DasRealization, Point, SystemShape,
};
use iadas::feasibility::Classification;
use iadas::harness::config::PropernessSection;
use iadas::harness::experiments::PREDICTED_LABEL;
use iadas::harness::output::csv_string;
use iadas::harness::{
    properness_table, run_backoff_prediction, run_cell_map, run_snr_sweep, select_rru, ChannelModel,
    ConstraintMode, Coordinate, ExperimentConfig,
};
use iadas::mathcore::{gaussian_matrix, RandomSeed};
use iadas::Error;

fn sweep_config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(text).unwrap()
}

const SMALL_SWEEP: &str = r#"
[experiment]
modes = ["unconstrained", "max_power_backoff", "strict_per_rru"]
snr_db = [0.0, 20.0]
trials = 6
seed = 17

[shape]
users = 3
tx_antennas = 4
rx_antennas = 6
streams = 2
rrus = 4

[solver]
tol = 1e-8
max_iters = 300
"#;

#[test]
fn sweep_is_deterministic_and_thread_independent() {
    let cfg = sweep_config(SMALL_SWEEP);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| csv_string(&run_snr_sweep(&cfg).unwrap()).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(1));
    assert_eq!(a, run(3));

    let mut other = cfg.clone();
    other.experiment.seed = 18;
    assert_ne!(a, csv_string(&run_snr_sweep(&other).unwrap()).unwrap());
}

#[test]
fn sweep_rows_are_well_formed() {
    let cfg = sweep_config(SMALL_SWEEP);
    let rows = run_snr_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 3 * 2);
    let modes: Vec<_> = rows.iter().map(|r| r.constraint_mode.as_str()).collect();
    assert_eq!(
        modes,
        ["unconstrained", "unconstrained", "max_power_backoff", "max_power_backoff", "strict_per_rru", "strict_per_rru"]
    );
    for r in &rows {
        assert_eq!(r.trials, 6);
        assert_eq!(r.seed, 17);
        assert!((0.0..=1.0).contains(&r.convergence_rate));
        assert!(r.std_sum_rate >= 0.0);
        assert!((r.per_user_means.iter().sum::<f64>() - r.mean_sum_rate).abs() < 1e-9);
        assert!(matches!(r.coordinate, Coordinate::SnrDb(_)));
    }
    // Unconstrained IA on a proper shape converges in every trial.
    assert_eq!(rows[0].convergence_rate, 1.0);
    // Backing off only removes power from an aligned solution.
    assert!(rows[3].mean_sum_rate <= rows[1].mean_sum_rate);

    let csv = csv_string(&rows).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# snr_db"));
    assert_eq!(
        lines.next().unwrap(),
        "experiment,shape,constraint_mode,snr_db,mean_sum_rate,std_sum_rate,convergence_rate,trials,seed"
    );
    assert_eq!(lines.count(), 6);
}

#[test]
fn backoff_prediction_flags_high_snr_rows() {
    let cfg = sweep_config(
        r#"
[experiment]
snr_db = [10.0, 30.0, 40.0]
trials = 4
[shape]
users = 3
tx_antennas = 2
rx_antennas = 2
streams = 1
rrus = 2
"#,
    );
    let rows = run_backoff_prediction(&cfg).unwrap();
    assert_eq!(rows.len(), 9);
    let predicted: Vec<_> = rows.iter().filter(|r| r.constraint_mode == PREDICTED_LABEL).collect();
    assert_eq!(predicted.len(), 3);
    for r in &rows {
        let Coordinate::SnrDb(s) = r.coordinate else { panic!("snr rows expected") };
        assert_eq!(r.high_snr_valid, Some(s >= 30.0));
    }
    for (p, u) in predicted.iter().zip(&rows[..3]) {
        assert!(p.mean_sum_rate <= u.mean_sum_rate);
    }
    let csv = csv_string(&rows).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",seed,high_snr_valid"));

    let mut multi = cfg.clone();
    multi.shape.as_mut().unwrap().streams = 2;
    multi.shape.as_mut().unwrap().tx_antennas = 4;
    multi.shape.as_mut().unwrap().rx_antennas = 4;
    assert!(matches!(run_backoff_prediction(&multi), Err(Error::Config(_))));
}

#[test]
fn defaults_describe_the_cell_scenario() {
    let cfg = ExperimentConfig::default();
    assert_eq!(cfg.cell.total_power_dbm, 46.0);
    assert_eq!(cfg.cell.noise_power_dbm, -106.0);
    assert_eq!(cfg.cell.cell_radius_m, 300.0);
    assert_eq!(cfg.experiment.trials, 200);
    let das = cfg.shape_for(ChannelModel::Das).unwrap();
    assert_eq!(das, SystemShape::new(7, 15, 5, 2, 5).unwrap());
    assert_eq!(cfg.experiment.modes.len(), 3);
    assert!(cfg.experiment.modes.contains(&ConstraintMode::StrictPerRru));
}

#[test]
fn config_rejects_unknown_and_invalid_keys() {
    assert!(matches!(ExperimentConfig::from_toml_str("[experiment]\nbogus = 1"), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::from_toml_str("[experiment]\ntrials = 0"), Err(Error::Config(_))));
    assert!(ExperimentConfig::from_toml_str("[shape]\nusers = 3\ntx_antennas = 4\nrx_antennas = 4\nstreams = 1\nrrus = 3")
        .is_err());
}

#[test]
fn properness_table_classifies_named_shapes() {
    let grid = |k, nt, nr, ns, rrus| PropernessSection {
        users: vec![k],
        tx_antennas: vec![nt],
        rx_antennas: vec![nr],
        streams: vec![ns],
        rrus: vec![rrus],
        per_antenna: false,
    };
    let class = |g: PropernessSection| properness_table(&g)[0].classification;
    assert_eq!(class(grid(3, 2, 2, 1, 2)), Classification::FeasibleWithoutPerRru);
    assert_eq!(class(grid(3, 4, 6, 2, 4)), Classification::StrictlyFeasible);
    assert_eq!(class(grid(7, 4, 5, 1, 4)), Classification::FeasibleWithoutPerRru);
    assert_eq!(class(grid(7, 4, 5, 1, 4)).label(), "feasible only without per-RRU constraints");
}

#[test]
fn rru_selection_ignores_fast_fading() {
    let shape = SystemShape::new(7, 15, 5, 2, 5).unwrap();
    for seed in 0..10 {
        let geom = build_geometry(300.0, 7, RandomSeed::new(seed, 0)).unwrap();
        let das = draw_das_channels(&geom, shape, RandomSeed::new(seed, 1)).unwrap();
        let mut rng = RandomSeed::new(seed, 2).rng();
        let refaded = DasRealization {
            channels: ChannelSet::from_links(shape, (0..49).map(|_| gaussian_matrix(&mut rng, 5, 15)).collect()).unwrap(),
            gains_db: das.gains_db.clone(),
        };
        for k in 0..7 {
            assert_eq!(select_rru(&das, k), select_rru(&refaded, k));
            let best = (0..5).map(|r| das.gain_db(k, k, r)).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(das.gain_db(k, k, select_rru(&das, k)), best);
        }
    }
}

#[test]
fn cell_map_covers_the_centre_cell() {
    let cfg = sweep_config(
        r#"
[experiment]
seed = 4
[cell]
grid_step_m = 150.0
drops_per_point = 1
solver_max_iters = 20
algorithms = ["das_strict_per_rru", "rru_selection"]
"#,
    );
    let rows = run_cell_map(&cfg).unwrap();
    assert!(!rows.is_empty());
    assert_eq!(rows.len() % 2, 0);
    for r in &rows {
        let Coordinate::Grid { x, y } = r.coordinate else { panic!("grid rows expected") };
        assert!(hexagon_contains(300.0, &Point::new(x, y)));
        assert!(r.mean_sum_rate >= 0.0 && r.mean_sum_rate.is_finite());
        assert_eq!(r.trials, 1);
    }
    assert_eq!(csv_string(&rows).unwrap(), csv_string(&run_cell_map(&cfg).unwrap()).unwrap());
}

mod common;

use common::{scenario_path, shipped};
use irsuav::channel::FallbackState;
use irsuav::deployment::Strategy as Plan;
use irsuav::irs::SurfaceKind;
use irsuav::scenario::{load_scenario, scenario_digest, Experiment, NodeRole, Scenario};
use irsuav::Error;
use proptest::prelude::*;

const MINIMAL_TRAJECTORY: &str = r#"
[path_loss]
uav_sn = { exponent = 2.6 }
uav_irs = { exponent = 2.4 }
irs_sn = { exponent = 2.2 }

[[nodes]]
id = "sn1"
role = "sensor_node"
position = [100.0, 20.0, 0.0]

[experiment.trajectory]
start = [50.0, 0.0, 30.0]
end = [200.0, 0.0, 30.0]
fixed_altitude = 30.0
v_max = 50.0
rate_target = 1.0
"#;

fn field_of(err: Error) -> String {
    match err {
        Error::Validation { field, .. } => field,
        other => panic!("expected a validation error, got {other}"),
    }
}

#[test]
fn fig4_layout() {
    let s = shipped("fig4.scenario");
    let sensors: Vec<_> = s.nodes_with_role(NodeRole::SensorNode).collect();
    assert_eq!(sensors.len(), 8);
    assert_eq!(s.surfaces.len(), 1);
    let irs = &s.surfaces[0];
    assert_eq!(irs.kind, SurfaceKind::Terrestrial);
    assert_eq!(irs.num_elements, 300);
    assert_eq!(irs.covered_node_ids.as_deref().unwrap(), ["sn3", "sn4", "sn5", "sn6"]);
    let e = s.trajectory_experiment().unwrap();
    assert_eq!((e.start.x, e.start.y, e.start.z), (50.0, 0.0, 30.0));
    assert_eq!((e.end.x, e.end.y, e.end.z), (200.0, 0.0, 30.0));
    assert_eq!((e.v_max, e.slot_duration, e.fixed_altitude), (50.0, 0.1, 30.0));
    let exps: Vec<f64> = ["uav_sn", "uav_irs", "irs_sn"]
        .iter()
        .map(|c| s.path_loss[*c].exponent)
        .collect();
    assert_eq!(exps, [2.6, 2.4, 2.2]);
    for n in &s.nodes {
        assert!((0.0..=250.0).contains(&n.position.x) && (-100.0..=100.0).contains(&n.position.y));
    }
    let model = s.data_collection_model().unwrap();
    for link in &model.links {
        let covered = ["sn3", "sn4", "sn5", "sn6"].contains(&link.id.as_str());
        assert_eq!(link.reflected.is_some(), covered, "{}", link.id);
    }
}

#[test]
fn fig4_baseline_differs_only_in_the_surface() {
    let with = shipped("fig4.scenario");
    let without = shipped("fig4-no-irs.scenario");
    assert_eq!(with.nodes, without.nodes);
    assert_eq!(without.surfaces[0].num_elements, 0);
    assert_eq!(
        with.data_collection_model().unwrap().without_reflectors().links.len(),
        without.data_collection_model().unwrap().links.len()
    );
}

#[test]
fn fig5_layout() {
    let s = shipped("fig5.scenario");
    let e = s.deployment_experiment().unwrap();
    assert_eq!(e.n_budget, 600);
    assert_eq!(e.users.len(), 2);
    assert_eq!(e.strategies, Plan::ALL.to_vec());
    let thresholds: Vec<(f64, FallbackState)> = s
        .link_state_rules
        .iter()
        .map(|r| (r.min_altitude_for_los, r.fallback))
        .collect();
    assert_eq!(thresholds, [(30.0, FallbackState::Nlos), (50.0, FallbackState::Nlos)]);
}

#[test]
fn defaults_are_filled_in_and_emitted() {
    let s: Scenario<f64> = Scenario::from_toml_str(MINIMAL_TRAJECTORY).unwrap();
    let e = s.trajectory_experiment().unwrap();
    assert_eq!(e.slot_duration, 0.1);
    assert_eq!(e.max_time, 60.0);
    assert_eq!(e.temperature, 0.05);
    assert_eq!(e.max_iterations, 200);
    assert_eq!(e.uav, "uav");
    assert_eq!(
        (s.radio.tx_power, s.radio.noise_power, s.radio.ref_path_gain_db),
        (0.1, 1e-11, -30.0)
    );
    let text = s.to_toml_string().unwrap();
    for key in [
        "slot_duration",
        "max_time",
        "temperature",
        "tx_power",
        "noise_power",
        "ref_path_gain_db",
    ] {
        assert!(text.contains(key), "{key} missing from\n{text}");
    }
}

#[test]
fn negative_budget_is_rejected() {
    let text = std::fs::read_to_string(scenario_path("fig5.scenario"))
        .unwrap()
        .replace("n_budget = 600", "n_budget = -1");
    let err = Scenario::<f64>::from_toml_str(&text).unwrap_err();
    assert_eq!(field_of(err), "experiment.deployment.n_budget");
}

#[test]
fn unknown_keys_are_rejected() {
    let text = MINIMAL_TRAJECTORY.replace("v_max = 50.0", "v_max = 50.0\nvmax = 40.0");
    let err = Scenario::<f64>::from_toml_str(&text).unwrap_err();
    assert!(matches!(err, Error::Parse(ref m) if m.contains("vmax")), "{err}");
}

#[test]
fn parse_errors_carry_a_location() {
    let text = MINIMAL_TRAJECTORY.replace("v_max = 50.0", "v_max = = 50.0");
    let err = Scenario::<f64>::from_toml_str(&text).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("line") && msg.contains("column"), "{msg}");
}

#[test]
fn validation_names_the_offending_field() {
    let cases = [
        ("v_max = 50.0", "v_max = 0.0", "experiment.trajectory.v_max"),
        (
            "rate_target = 1.0",
            "rate_target = -1.0",
            "experiment.trajectory.rate_target",
        ),
        (
            "uav_sn = { exponent = 2.6 }",
            "uav_sn = { exponent = 0.5 }",
            "path_loss.uav_sn.exponent",
        ),
        (
            "position = [100.0, 20.0, 0.0]",
            "position = [100.0, 20.0, -1.0]",
            "nodes[0].position",
        ),
        (
            "rate_target = 1.0",
            "rate_target = 1.0\nmax_time = 1.0",
            "experiment.trajectory.max_time",
        ),
        (
            "rate_target = 1.0",
            "rate_target = 1.0\ndirect_class = \"nope\"",
            "experiment.trajectory.direct_class",
        ),
    ];
    for (from, to, field) in cases {
        let err = Scenario::<f64>::from_toml_str(&MINIMAL_TRAJECTORY.replace(from, to)).unwrap_err();
        assert_eq!(field_of(err), field, "{to}");
    }
}

#[test]
fn duplicate_ids_and_unknown_references_are_rejected() {
    let dup = MINIMAL_TRAJECTORY.to_string()
        + "\n[[nodes]]\nid = \"sn1\"\nrole = \"sensor_node\"\nposition = [1.0, 1.0, 0.0]\n";
    // Appending after the experiment table would nest it; rebuild instead.
    let (head, tail) = dup.split_once("[experiment.trajectory]").unwrap();
    let (exp, extra) = tail.split_once("\n[[nodes]]").unwrap();
    let text = format!("{head}[[nodes]]{extra}\n[experiment.trajectory]{exp}");
    assert_eq!(
        field_of(Scenario::<f64>::from_toml_str(&text).unwrap_err()),
        "nodes[1].id"
    );

    let text = MINIMAL_TRAJECTORY.replace(
        "[experiment.trajectory]",
        "[[link_state_rules]]\nbetween = [\"uav\", \"ghost\"]\nmin_altitude_for_los = 10.0\nfallback = \"nlos\"\n\n[experiment.trajectory]",
    );
    assert_eq!(
        field_of(Scenario::<f64>::from_toml_str(&text).unwrap_err()),
        "link_state_rules[0].between"
    );
}

#[test]
fn nlos_links_need_an_nlos_class() {
    let text = MINIMAL_TRAJECTORY.replace(
        "[experiment.trajectory]",
        "[[link_state_rules]]\nbetween = [\"uav\", \"sn1\"]\nmin_altitude_for_los = 100.0\nfallback = \"nlos\"\n\n[experiment.trajectory]",
    );
    assert_eq!(
        field_of(Scenario::<f64>::from_toml_str(&text).unwrap_err()),
        "experiment.trajectory.nlos_class"
    );
    let with_class = text.replace(
        "irs_sn = { exponent = 2.2 }",
        "irs_sn = { exponent = 2.2 }\nnlos = { exponent = 3.5 }",
    ) + "nlos_class = \"nlos\"\n";
    let s = Scenario::<f64>::from_toml_str(&with_class).unwrap();
    assert_eq!(s.data_collection_model().unwrap().links[0].direct_exponent, Some(3.5));
}

#[test]
fn experiment_kind_is_checked() {
    let s = shipped("fig5.scenario");
    assert!(matches!(s.experiment, Experiment::Deployment(_)));
    assert!(matches!(s.trajectory_experiment(), Err(Error::Config(_))));
    assert!(matches!(
        shipped("fig4.scenario").deployment_experiment(),
        Err(Error::Config(_))
    ));
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(
        load_scenario::<f64>("/definitely/not/here.scenario"),
        Err(Error::Io(_))
    ));
}

#[test]
fn digest_is_sha256_hex() {
    assert_eq!(
        scenario_digest(b"abc"),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
}

#[test]
fn shipped_files_round_trip() {
    for name in ["fig4.scenario", "fig4-no-irs.scenario", "fig5.scenario"] {
        let s = shipped(name);
        let again = Scenario::<f64>::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
        assert_eq!(s, again, "{name}");
    }
}

#[test]
fn single_precision_load() {
    let s: Scenario<f32> = load_scenario(scenario_path("fig5.scenario")).unwrap();
    assert_eq!(s.deployment_experiment().unwrap().n_budget, 600);
}

fn coordinate() -> impl Strategy<Value = f64> {
    -500.0..500.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn emitted_trajectory_scenarios_load_back_equal(
        sensors in prop::collection::vec((coordinate(), coordinate(), 0.0..5.0f64), 1..6),
        surface in prop::option::of((coordinate(), coordinate(), 0.0..20.0f64, 0u32..1000, prop::option::of(1.0..300.0f64))),
        ex in (1.0..5.0f64, 1.0..5.0f64, 1.0..5.0f64),
        v in 10.0..80.0f64,
        delta in 0.05..0.5f64,
        target in 0.01..5.0f64,
        compare in any::<bool>(),
        threshold in prop::option::of(0.0..100.0f64),
        db in -50.0..-10.0f64,
    ) {
        let mut text = format!(
            "name = \"generated\"\n[radio]\nref_path_gain_db = {db}\n\n[path_loss]\nuav_sn = {{ exponent = {} }}\nuav_irs = {{ exponent = {} }}\nirs_sn = {{ exponent = {} }}\nnlos = {{ exponent = 3.5 }}\n\n",
            ex.0, ex.1, ex.2
        );
        for (i, (x, y, z)) in sensors.iter().enumerate() {
            text += &format!("[[nodes]]\nid = \"sn{i}\"\nrole = \"sensor_node\"\nposition = [{x}, {y}, {z}]\n\n");
        }
        if let Some((x, y, z, n, radius)) = surface {
            text += &format!("[[surfaces]]\nid = \"irs\"\nkind = \"terrestrial\"\nposition = [{x}, {y}, {z}]\nnum_elements = {n}\nfacing_normal = [0.0, -1.0, 0.0]\n");
            if let Some(r) = radius {
                text += &format!("coverage_radius = {r}\n");
            }
            text += "\n";
        }
        if let Some(h) = threshold {
            text += &format!("[[link_state_rules]]\nbetween = [\"uav\", \"sn0\"]\nmin_altitude_for_los = {h}\nfallback = \"blocked\"\n\n");
        }
        text += &format!(
            "[experiment.trajectory]\nstart = [0.0, 0.0, 30.0]\nend = [100.0, 0.0, 30.0]\nfixed_altitude = 30.0\nv_max = {v}\nslot_duration = {delta}\nrate_target = {target}\nmax_time = 120.0\ncompare_without_irs = {compare}\nnlos_class = \"nlos\"\n"
        );
        let s: Scenario<f64> = Scenario::from_toml_str(&text).unwrap();
        let emitted = s.to_toml_string().unwrap();
        let back: Scenario<f64> = Scenario::from_toml_str(&emitted).unwrap();
        prop_assert_eq!(&s, &back);
        prop_assert_eq!(back.to_toml_string().unwrap(), emitted);
    }

    #[test]
    fn emitted_deployment_scenarios_load_back_equal(
        budget in 0i64..5000,
        users in prop::collection::vec((coordinate(), coordinate()), 1..4),
        thresholds in prop::collection::vec(0.0..120.0f64, 1..4),
        pick in prop::sample::subsequence(vec![Plan::UserSideOnly, Plan::BsSideOnly, Plan::Hybrid], 1..=3),
    ) {
        let mut text = String::from("[path_loss]\nlos = { exponent = 2.2 }\nnlos = { exponent = 3.5 }\n\n[[nodes]]\nid = \"bs\"\nrole = \"bs\"\nposition = [0.0, 0.0, 25.0]\n\n");
        for (i, (x, y)) in users.iter().enumerate() {
            text += &format!("[[nodes]]\nid = \"u{i}\"\nrole = \"user\"\nposition = [{x}, {y}, 0.0]\n\n");
        }
        text += "[[surfaces]]\nid = \"air\"\nkind = \"aerial\"\nposition = [20.0, 0.0, 50.0]\nnum_elements = 0\n\n";
        text += "[[surfaces]]\nid = \"wall\"\nkind = \"terrestrial\"\nposition = [0.0, 130.0, 10.0]\nnum_elements = 0\nfacing_normal = [0.0, -1.0, 0.0]\n\n";
        for (i, h) in thresholds.iter().enumerate().take(users.len()) {
            text += &format!("[[link_state_rules]]\nbetween = [\"air\", \"u{i}\"]\nmin_altitude_for_los = {h}\nfallback = \"nlos\"\n\n");
        }
        let ids: Vec<String> = (0..users.len()).map(|i| format!("\"u{i}\"")).collect();
        let strategies: Vec<String> = pick.iter().map(|s| format!("\"{}\"", s.label())).collect();
        text += &format!(
            "[experiment.deployment]\nbs = \"bs\"\nusers = [{}]\naerial_surface = \"air\"\nterrestrial_surface = \"wall\"\nn_budget = {budget}\nstrategies = [{}]\n",
            ids.join(", "),
            strategies.join(", ")
        );
        let s: Scenario<f64> = Scenario::from_toml_str(&text).unwrap();
        let back: Scenario<f64> = Scenario::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
        prop_assert_eq!(s, back);
    }
}

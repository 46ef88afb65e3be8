use saddlecheck::io::{cache_path, fields_from_csv, read_solution, write_solution};
use saddlecheck::pipeline::*;
use saddlecheck::{ConfigError, IoError};
use std::fs;

fn cfg(m: usize, stages: &[Stage], cache_dir: &std::path::Path) -> RunConfig {
    let o = Overrides {
        m: Some(m),
        r: Some(8.0),
        h: Some(0.2),
        stages: Some(stages.to_vec()),
        cache_dir: Some(cache_dir.to_path_buf()),
        ..Overrides::default()
    };
    RunConfig::resolve(None, &o).unwrap()
}

#[test]
fn stage_names_round_trip() {
    for s in Stage::ALL {
        assert_eq!(s.name().parse::<Stage>().unwrap(), s);
        assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
    }
    assert_eq!(parse_stages("suite, spectrum").unwrap(), [Stage::Suite, Stage::Spectrum]);
    assert!(parse_stages("suite,plot").is_err());
}

#[test]
fn plan_adds_prerequisites_in_order() {
    let d = tempfile::tempdir().unwrap();
    let c = cfg(4, &[Stage::Certificate, Stage::Suite], d.path());
    assert_eq!(c.plan(), [Stage::Solve, Stage::Suite, Stage::Supersolution, Stage::Certificate]);
    let c = cfg(4, &[Stage::Rigor], d.path());
    assert_eq!(c.plan(), [Stage::Rigor]);
}

#[test]
fn config_file_and_flag_precedence() {
    let text = r#"
[problem]
n = 10
R = 16.0
h = 0.1

[stages]
run = ["suite", "spectrum"]
checks = ["1", "27b"]

[spectrum]
tol = 1e-9

[output]
cache = "off"
threads = 2
"#;
    let c = RunConfig::resolve(Some(text), &Overrides::default()).unwrap();
    assert_eq!((c.m, c.n, c.r, c.h), (5, Some(10), 16.0, 0.1));
    assert_eq!(c.stages, [Stage::Suite, Stage::Spectrum]);
    assert_eq!(c.checks, ["1", "27b"]);
    assert_eq!((c.eig_tol, c.cache, c.threads), (1e-9, CachePolicy::Off, Some(2)));

    let o = Overrides { m: Some(4), h: Some(0.05), cache: Some(CachePolicy::Refresh), ..Overrides::default() };
    let c = RunConfig::resolve(Some(text), &o).unwrap();
    assert_eq!((c.m, c.n, c.r, c.h, c.cache), (4, Some(8), 16.0, 0.05, CachePolicy::Refresh));
}

#[test]
fn config_rejections() {
    let bad = |text: &str, o: Overrides| RunConfig::resolve(Some(text), &o).unwrap_err();
    assert!(matches!(bad("[problem]\nm = 4\nbogus = 1\n", Overrides::default()), ConfigError::Parse(_)));
    assert!(matches!(bad("[problem]\nm = 7\n", Overrides::default()), ConfigError::Invalid(_)));
    assert!(matches!(bad("[problem]\nn = 9\n", Overrides::default()), ConfigError::Invalid(_)));
    assert!(matches!(bad("[problem]\nm = 4\nn = 10\n", Overrides::default()), ConfigError::Invalid(_)));
    assert!(matches!(bad("", Overrides::default()), ConfigError::Invalid(_)));
    let stages = |s: &str| Overrides { m: Some(2), stages: Some(parse_stages(s).unwrap()), ..Overrides::default() };
    assert!(bad("", stages("supersolution")).to_string().contains("n in {8, 10, 12}"));
    assert!(RunConfig::resolve(None, &stages("suite,spectrum")).is_ok());
    assert!(matches!(bad("[problem]\nm = 4\nh = 0.3\n", Overrides::default()), ConfigError::Invalid(_)));
    assert!(matches!(bad("[problem]\nm = 4\nR = 6.0\nh = 0.2\n", Overrides::default()), ConfigError::Invalid(_)));
    assert!(matches!(
        bad("[problem]\nm = 4\n[stages]\nchecks = [\"30\"]\n", Overrides::default()),
        ConfigError::Invalid(_)
    ));
    assert!(matches!(bad("[problem]\nm = 4\n[stages]\nrun = []\n", Overrides::default()), ConfigError::Invalid(_)));
    assert!(matches!(bad("[problem]\nm = 4\n[output]\nthreads = 0\n", Overrides::default()), ConfigError::Invalid(_)));
    assert!(matches!(
        bad("[problem]\nm = 4\n[output]\ncache = \"maybe\"\n", Overrides::default()),
        ConfigError::Invalid(_)
    ));
}

#[test]
fn cache_hit_and_rejections() {
    let d = tempfile::tempdir().unwrap();
    let c = cfg(3, &[Stage::Solve], d.path());
    let (a, src) = obtain_solution(&c).unwrap();
    assert_eq!(src, "solved");
    let (b, src) = obtain_solution(&c).unwrap();
    assert!(src.starts_with("cache "));
    assert_eq!(a.u.data, b.u.data);
    assert_eq!(a.u_st.data, b.u_st.data);
    assert_eq!(a.newton_iterations, b.newton_iterations);

    let p = cache_path(d.path(), 3, 8.0, 0.2);
    assert!(matches!(read_solution(&p, 3, 8.0, 0.2, 1e-9), Err(IoError::HeaderMismatch(_))));
    assert!(matches!(read_solution(&p, 2, 8.0, 0.2, c.newton_tol), Err(IoError::HeaderMismatch(_))));

    // flip one byte of the payload
    let mut bytes = fs::read(&p).unwrap();
    let last = bytes.len() - 3;
    bytes[last] ^= 1;
    fs::write(&p, &bytes).unwrap();
    assert!(matches!(read_solution(&p, 3, 8.0, 0.2, c.newton_tol), Err(IoError::HashMismatch)));
    let (r, src) = obtain_solution(&c).unwrap();
    assert!(src.contains("rejected"), "{src}");
    assert_eq!(r.u.data, a.u.data);
    assert!(read_solution(&p, 3, 8.0, 0.2, c.newton_tol).is_ok(), "re-solve rewrites the entry");

    let refresh = RunConfig { cache: CachePolicy::Refresh, ..c.clone() };
    assert_eq!(obtain_solution(&refresh).unwrap().1, "solved");
    let off = RunConfig { cache: CachePolicy::Off, cache_dir: Some(d.path().join("unused")), ..c };
    obtain_solution(&off).unwrap();
    assert!(!d.path().join("unused").exists());
}

#[test]
fn write_then_read_is_bitwise() {
    let d = tempfile::tempdir().unwrap();
    let c = cfg(2, &[Stage::Solve], d.path());
    let (sol, _) = obtain_solution(&RunConfig { cache: CachePolicy::Off, ..c.clone() }).unwrap();
    let p = d.path().join("x.sol");
    write_solution(&p, &sol, c.newton_tol).unwrap();
    let back = read_solution(&p, 2, 8.0, 0.2, c.newton_tol).unwrap();
    assert_eq!(
        back.u.data.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        sol.u.data.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
    assert_eq!(back.residual_norm.to_bits(), sol.residual_norm.to_bits());
}

#[test]
fn fields_csv_round_trips_bitwise() {
    let d = tempfile::tempdir().unwrap();
    let art = run(&cfg(4, &[Stage::Solve], d.path())).unwrap();
    let out = tempfile::tempdir().unwrap();
    let paths = export(&art, Export::Fields, out.path()).unwrap();
    let text = fs::read_to_string(&paths[0]).unwrap();
    let back = fields_from_csv(&text).unwrap();
    let sol = art.solution.as_ref().unwrap();
    assert_eq!(back.iter().map(|f| f.0.as_str()).collect::<Vec<_>>(), ["u", "u_s", "u_t", "u_ss", "u_st", "u_tt"]);
    for (f, orig) in back.iter().zip([&sol.u, &sol.u_s, &sol.u_t, &sol.u_ss, &sol.u_st, &sol.u_tt]) {
        let a: Vec<u64> = f.1.data.iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = orig.data.iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b, "{}", f.0);
    }
}

#[test]
fn missing_stage_data_is_an_error() {
    let d = tempfile::tempdir().unwrap();
    let art = run(&cfg(4, &[Stage::Solve], d.path())).unwrap();
    let out = tempfile::tempdir().unwrap();
    assert!(matches!(export(&art, Export::SignMaps, out.path()), Err(IoError::EmptyStage(_))));
    assert!(matches!(export(&art, Export::Eigenvector, out.path()), Err(IoError::EmptyStage(_))));
    let rigor_only =
        run(&RunConfig { stages: vec![Stage::Rigor], rigor: quick_rigor(), ..cfg(4, &[Stage::Solve], d.path()) });
    let art = rigor_only.unwrap();
    assert!(art.solution.is_none());
    assert!(matches!(export(&art, Export::Fields, out.path()), Err(IoError::EmptyStage(_))));
}

fn quick_rigor() -> saddlecheck::rigor::ProverConfig {
    saddlecheck::rigor::ProverConfig { max_boxes: 2000, ..Default::default() }
}

fn strip_volatile(r: &RunReport) -> String {
    let mut r = r.clone();
    r.run = RunInfo::default();
    r.config.cache_dir = None;
    r.config.threads = None;
    r.to_json().unwrap()
}

#[test]
fn report_deterministic_apart_from_run_info() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let stages = [Stage::Suite, Stage::Supersolution, Stage::Spectrum, Stage::Certificate, Stage::Plots];
    let a = run(&RunConfig { threads: Some(1), ..cfg(4, &stages, d1.path()) }).unwrap();
    let b = run(&RunConfig { threads: Some(3), ..cfg(4, &stages, d2.path()) }).unwrap();
    assert_eq!(strip_volatile(&a.report), strip_volatile(&b.report));
    assert_ne!(a.report.run, RunInfo::default());
    let back = RunReport::from_json(&a.report.to_json().unwrap()).unwrap();
    // the eigenvector is not serialized
    assert_eq!(back.to_json().unwrap(), a.report.to_json().unwrap());

    let o1 = tempfile::tempdir().unwrap();
    let o2 = tempfile::tempdir().unwrap();
    let p1 = export(&a, Export::SignMaps, o1.path()).unwrap();
    let p2 = export(&b, Export::SignMaps, o2.path()).unwrap();
    assert_eq!(p1.len(), 12);
    for (x, y) in p1.iter().zip(&p2) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn report_schema_version_checked() {
    let d = tempfile::tempdir().unwrap();
    let art = run(&cfg(4, &[Stage::Solve], d.path())).unwrap();
    let text = art.report.to_json().unwrap().replace("\"schema_version\": 1", "\"schema_version\": 2");
    assert!(matches!(RunReport::from_json(&text), Err(IoError::Malformed(_))));
}

#[test]
fn summary_line_reflects_verdicts() {
    let d = tempfile::tempdir().unwrap();
    let art = run(&cfg(2, &[Stage::Spectrum], d.path())).unwrap();
    let r = &art.report;
    let e = r.spectrum.as_ref().unwrap();
    assert!(e.lambda_min < 0.0, "m = 2 has a negative direction: {}", e.lambda_min);
    assert!(r.passed);
    let line = r.summary_line();
    assert!(line.starts_with("SUMMARY status=PASS m=2 solve=pass spectrum=pass lambda_min=-"), "{line}");
    assert!(!line.contains(" n="));
    let out = tempfile::tempdir().unwrap();
    let p = export(&art, Export::Eigenvector, out.path()).unwrap();
    assert!(fs::read_to_string(&p[0]).unwrap().starts_with("s,t,value\n"));
}

#[test]
fn selected_checks_only() {
    let d = tempfile::tempdir().unwrap();
    let c = RunConfig { checks: vec!["27b".into(), "1".into()], r: 12.0, h: 0.05, ..cfg(4, &[Stage::Suite], d.path()) };
    let art = run(&c).unwrap();
    let ids: Vec<&str> = art.report.checks.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(ids, ["27b", "1"]);
    assert!(!art.report.passed, "{:?}", art.report.checks);
    assert!(art.report.summary_line().contains("suite=fail checks=1/2"));
    let v = art.report.verdicts.iter().find(|v| v.stage == Stage::Suite).unwrap();
    assert_eq!(v.detail, "failed: 27b");
}

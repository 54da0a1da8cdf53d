use misig_core::audit::test_influence;
use misig_core::sim::*;
use misig_core::{AuditConfig, SearchSpec};
use std::time::Instant;

fn main() {
    let t = Instant::now();
    let mut shapes = vec![];
    for rep in 0..20u64 {
        let c = SimConfig::new(Dist::StudentT(5.0), Dist::StudentT(5.0), 4000);
        let d = generate_synthetic(&SimConfig { seed: 5, ..c }, rep).unwrap();
        let r = test_influence(&d, &AuditConfig { seed: rep, ..AuditConfig::new(SearchSpec::constant(1)) }).unwrap();
        shapes.push((r.family, r.null_model.shape));
    }
    println!("{:?} {:?}", shapes, t.elapsed());
    let t = Instant::now();
    let cells = shape_study(&[SimConfig { reps: 200, ..SimConfig::new(Dist::StudentT(5.0), Dist::StudentT(5.0), 2000) }]).unwrap();
    println!("{:?} {:?}", cells[0].summary, t.elapsed());
}

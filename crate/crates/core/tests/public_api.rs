use crcm::analysis::{gnz_residual_crcm, standard_test_functions};
use crcm::connectivity::count_components;
use crcm::io::{read_samples, SampleWriter, StreamHeader};
use crcm::samplers::{fk_color, run_chain, sample_crcm_exact, SpanningRule};
use crcm::{ModelParamsF32, ModelParamsF64, RadiusLaw, SeedStream, WindowF32, WindowF64};

#[test]
fn chain_output_round_trips_through_a_stream() {
    let params = ModelParamsF64::new(1.0, 2.0, RadiusLaw::dirac(0.5).unwrap(), WindowF64::cube(2, 3.0).unwrap()).unwrap();
    let run = run_chain(&params, 5_000, 1_000, 100, SeedStream::new(3).stream(0)).unwrap();
    assert_eq!(run.samples.len(), 40);

    let header = StreamHeader { model: "crcm".into(), params: params.clone(), seed: 3 };
    let mut w = SampleWriter::new(Vec::new(), &header).unwrap();
    let mut rng = SeedStream::new(3).stream(1);
    let colored: Vec<_> = run.samples.iter().map(|c| fk_color(c, 2, SpanningRule::None, &mut rng).unwrap()).collect();
    for c in &colored {
        w.write_colored(c).unwrap();
    }
    let bytes = w.finish().unwrap();
    let back = read_samples::<f64, _>(bytes.as_slice()).unwrap();
    assert_eq!(back.header, header);
    assert_eq!(back.samples, run.samples);
    assert_eq!(back.colored(2).unwrap(), colored);
    assert!(colored.iter().all(|c| c.satisfies_hard_core()));
}

#[test]
fn single_precision_pipeline() {
    let params = ModelParamsF32::new(0.5, 2.0, RadiusLaw::uniform(0.2, 0.6).unwrap(), WindowF32::cube(2, 2.0).unwrap()).unwrap();
    let mut rng = SeedStream::new(9).stream(0);
    let samples: Vec<_> = (0..200).map(|_| sample_crcm_exact(&params, &mut rng).unwrap()).collect();
    assert!(samples.iter().all(|c| count_components(c, &params.boundary).component_count() <= c.len()));
    let reports = gnz_residual_crcm(&samples, &params, &standard_test_functions(&params), 10, &mut rng).unwrap();
    assert_eq!(reports.len(), 3);
    assert!(reports.iter().all(|r| r.lhs.is_finite() && r.rhs.is_finite()));
}

use lugre_pinn::datagen::{generate_swing_trial, Dataset, SimSettings};
use lugre_pinn::friction::LuGreParams;
use lugre_pinn::pinn::{Batch, ModelConfig, PinnModel, Variant};
use lugre_pinn::systems::PoBParams;

fn small_dataset() -> Dataset {
    let settings = SimSettings::default();
    let samples = generate_swing_trial(45.0, 1.0, 0.25, 0, &settings).unwrap();
    Dataset::new(samples, settings.rate)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

fn check_variant(variant: Variant) {
    let ds = small_dataset();
    let pob = PoBParams::default();
    let batch = Batch::<f64>::from_dataset(&ds, variant, &pob, variant.is_pe()).unwrap();
    let cfg = ModelConfig {
        variant,
        hidden_layers: 2,
        width: 12,
    };
    let init = LuGreParams::new(3e4, 150.0, 0.7, 0.25, 0.55, 3e-3).unwrap();
    let mut model = PinnModel::new(&cfg, &batch, &init, 17).unwrap();
    let lambda = 1e3;
    let loss = |m: &PinnModel<f64>| {
        if variant.is_pe() {
            m.total_loss_pe(&batch, lambda).unwrap().total
        } else {
            m.physics_loss_bb(&batch).unwrap()
        }
    };
    let mut g_net = vec![0.0; model.net.num_params()];
    let mut g_log = [0.0; 6];
    let terms = model.loss_and_grad(&batch, lambda, &mut g_net, &mut g_log).unwrap();
    assert!(rel_err(terms.total, loss(&model)) < 1e-12);

    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let stride = (model.net.num_params() / 100).max(1);
    let mut count = 0;
    for i in (0..model.net.num_params()).step_by(stride) {
        let orig = model.net.params()[i];
        model.net.params_mut()[i] = orig + h;
        let lp = loss(&model);
        model.net.params_mut()[i] = orig - h;
        let lm = loss(&model);
        model.net.params_mut()[i] = orig;
        let fd = (lp - lm) / (2.0 * h);
        if fd.abs() + g_net[i].abs() > 1e-9 * terms.total {
            worst = worst.max(rel_err(g_net[i], fd));
        }
        count += 1;
    }
    assert!(count >= 100);
    assert!(worst < 1e-4, "{variant}: worst network relative error {worst}");

    if variant.is_pe() {
        // log-scalars enter smoothly; a wider step keeps round-off out
        let h = 1e-4;
        for k in 0..6 {
            let orig = model.log_scalars.unwrap();
            let mut plus = orig;
            let mut minus = orig;
            plus[k] += h;
            minus[k] -= h;
            model.log_scalars = Some(plus);
            let lp = loss(&model);
            model.log_scalars = Some(minus);
            let lm = loss(&model);
            model.log_scalars = Some(orig);
            let fd = (lp - lm) / (2.0 * h);
            assert!(rel_err(g_log[k], fd) < 1e-4, "{variant} scalar {k}: {} vs {fd}", g_log[k]);
        }
    } else {
        assert_eq!(g_log, [0.0; 6]);
    }
}

#[test]
fn bb_loss_gradient_matches_finite_differences() {
    check_variant(Variant::Bb1);
    check_variant(Variant::Bb2);
}

#[test]
fn pe_loss_gradient_matches_finite_differences() {
    check_variant(Variant::Pe1);
    check_variant(Variant::Pe2);
}

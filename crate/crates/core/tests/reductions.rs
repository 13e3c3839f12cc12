mod support;

use support::checks;

#[test]
fn unguided_limit_of_guided_training() {
    println!("{}", checks::guided_zero_is_bigan().unwrap());
}

#[test]
fn full_fraction_sweep() {
    println!("{}", checks::sweep_full_is_probe().unwrap());
}

#[test]
fn faithfulness_baseline_row() {
    println!("{}", checks::faithfulness_train_test_is_probe().unwrap());
}

#[test]
fn probe_trainable_counts() {
    println!("{}", checks::probe_counts().unwrap());
}

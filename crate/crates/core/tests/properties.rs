//! Randomized invariants: state clamping, charge bookkeeping, the
//! equivalence of the state and charge pictures, series-pair laws, and
//! file-format round-trips.

use proptest::prelude::*;

use memsyn::circuit::{simulate, PulseTrain, SolverConfig, Topology};
use memsyn::device::{DriftModel, MemristorParams, MemristorState, Polarity, StepMethod};
use memsyn::expfile::{parse_experiment, serialize_experiment, Experiment};

fn polarity(positive: bool) -> Polarity {
    if positive {
        Polarity::Positive
    } else {
        Polarity::Negative
    }
}

/// Devices with resistances spanning three decades and log-uniform q0.
/// r_off stays below 1e6 so charge-picture comparisons keep their
/// conditioning (delta_r / m never exceeds ~1e2).
fn any_device() -> impl Strategy<Value = MemristorParams> {
    (
        1.0..1e3f64,     // r_on
        1.5..1e3f64,     // r_off / r_on
        0.0..1.0f64,     // where r_init sits inside [r_on, r_off]
        -8.0..-2.0f64,   // log10 q0
        prop::bool::ANY, // polarity
        prop::bool::ANY, // model
        1u32..6,         // window_p
    )
        .prop_map(|(r_on, ratio, pos, lq0, positive, biolek, p)| {
            let r_off = r_on * ratio;
            let r_init = r_on + pos * (r_off - r_on);
            let model = if biolek {
                DriftModel::BiolekWindow
            } else {
                DriftModel::LinearDrift
            };
            MemristorParams::new(
                r_on,
                r_off,
                r_init.clamp(r_on, r_off),
                10f64.powf(lq0),
                polarity(positive),
                model,
                p,
            )
            .expect("strategy respects the parameter constraints")
        })
}

/// (current, dt) step inputs: currents up to a milliamp of either sign,
/// steps from 0.1 us to 1 ms.
fn any_steps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(
        (-9.0..-3.0f64, prop::bool::ANY, -7.0..-3.0f64).prop_map(|(li, neg, ldt)| {
            let i = if neg { -1.0 } else { 1.0 } * 10f64.powf(li);
            (i, 10f64.powf(ldt))
        }),
        1..200,
    )
}

/// Opposite-polarity pairs in a narrower band (r_off <= 1e5) where the
/// accumulated integrator round-off stays below the 1e-9 oracle
/// tolerance over 2000 steps.
fn series_pair() -> impl Strategy<Value = Topology> {
    (
        100.0..1e3f64,
        1.5..100.0f64,
        0.05..0.95f64,
        100.0..1e3f64,
        1.5..100.0f64,
        0.05..0.95f64,
        -8.0..-2.0f64,
        prop::bool::ANY,
    )
        .prop_map(|(on1, ratio1, pos1, on2, ratio2, pos2, lq0, m1_positive)| {
            let q0 = 10f64.powf(lq0);
            let dev = |r_on: f64, ratio: f64, pos: f64, positive: bool| {
                let r_off = r_on * ratio;
                let r_init = (r_on + pos * (r_off - r_on)).clamp(r_on, r_off);
                MemristorParams::new(
                    r_on,
                    r_off,
                    r_init,
                    q0,
                    polarity(positive),
                    DriftModel::LinearDrift,
                    2,
                )
                .expect("strategy respects the parameter constraints")
            };
            Topology::series(
                dev(on1, ratio1, pos1, m1_positive),
                dev(on2, ratio2, pos2, !m1_positive),
            )
            .expect("polarities are opposite by construction")
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// x never leaves [0, 1] and q is the exact running sum of i * dt,
    /// whatever the step inputs.
    #[test]
    fn state_stays_clamped_and_charge_adds_up(
        dev in any_device(),
        steps in any_steps(),
        rk4 in prop::bool::ANY,
    ) {
        let method = if rk4 { StepMethod::Rk4 } else { StepMethod::Euler };
        let mut s = dev.initial_state();
        for (i, dt) in steps {
            let q_expected = s.q + i * dt;
            s = dev.step_state(&s, i, dt, method).unwrap();
            prop_assert!((0.0..=1.0).contains(&s.x), "x = {} escaped", s.x);
            prop_assert_eq!(s.q, q_expected);
            let m = dev.memristance(&s);
            prop_assert!(m >= dev.r_on() && m <= dev.r_off());
        }
    }

    /// The state picture m = r_off - delta_r * x and the charge picture
    /// m = r_init - eta * delta_r * q / q0 agree away from the rails.
    #[test]
    fn state_and_charge_pictures_agree(
        dev in any_device(),
        x_target in 0.0..0.99f64,
    ) {
        let dev = dev.with_model(DriftModel::LinearDrift);
        let eta = dev.polarity().value();
        let x0 = dev.initial_state().x;
        let q = (x_target - x0) * dev.q0() * eta;
        let x = x0 + eta * q / dev.q0();
        let from_state = dev.memristance(&MemristorState { x, q });
        let from_charge = dev.r_init() - eta * dev.delta_r() * q / dev.q0();
        let rel = (from_state - from_charge).abs() / from_charge;
        prop_assert!(rel <= 1e-12, "pictures differ by rel {rel}");
    }

    /// A positive-polarity device under positive current can only move
    /// toward r_on, under either integrator and either model.
    #[test]
    fn positive_drive_is_monotone(
        dev in any_device(),
        steps in any_steps(),
        rk4 in prop::bool::ANY,
    ) {
        let method = if rk4 { StepMethod::Rk4 } else { StepMethod::Euler };
        let dev = MemristorParams::new(
            dev.r_on(),
            dev.r_off(),
            dev.r_init(),
            dev.q0(),
            Polarity::Positive,
            dev.model(),
            dev.window_p(),
        )
        .unwrap();
        let mut s = dev.initial_state();
        let mut m_prev = dev.memristance(&s);
        for (i, dt) in steps {
            s = dev.step_state(&s, i.abs(), dt, method).unwrap();
            let m = dev.memristance(&s);
            prop_assert!(m <= m_prev, "memristance rose under positive drive");
            m_prev = m;
        }
    }

    /// Two devices differing only in polarity see exactly mirrored state
    /// rates (the sign flip is exact in float arithmetic), so their
    /// stepped states move in opposite directions while sharing q.
    #[test]
    fn opposite_polarities_mirror_the_rate(
        a in any_device(),
        li in -9.0..-3.0f64,
        neg in prop::bool::ANY,
        ldt in -7.0..-3.0f64,
    ) {
        let b = MemristorParams::new(
            a.r_on(),
            a.r_off(),
            a.r_init(),
            a.q0(),
            a.polarity().opposite(),
            a.model(),
            a.window_p(),
        )
        .unwrap();
        let i = if neg { -1.0 } else { 1.0 } * 10f64.powf(li);
        let dt = 10f64.powf(ldt);
        let s0 = a.initial_state();
        let (rate_a, qdot_a) = a.state_derivative(&s0, i);
        let (rate_b, qdot_b) = b.state_derivative(&s0, i);
        prop_assert_eq!(rate_a, -rate_b);
        prop_assert_eq!(qdot_a, qdot_b);
        let sa = a.step_state(&s0, i, dt, StepMethod::Euler).unwrap();
        let sb = b.step_state(&s0, i, dt, StepMethod::Euler).unwrap();
        prop_assert!((sa.x - s0.x) * (sb.x - s0.x) <= 0.0);
        prop_assert_eq!(sa.q, sb.q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// At the simulator's own recorded charge, the pair total obeys
    /// m_total = m0 - eta (dR1 - dR2) q / q0 while both states are
    /// interior. Time-integration error cancels (both sides use the same
    /// q), leaving only round-off drift between the x and q integrators.
    #[test]
    fn series_total_is_linear_in_the_shared_charge(
        pair in series_pair(),
        v_mag in 0.1..2.0f64,
        v_neg in prop::bool::ANY,
        n_steps in 100usize..2000,
    ) {
        let v = if v_neg { -v_mag } else { v_mag };
        let dt = 1e-5;
        let stim = PulseTrain::constant(v, n_steps as f64 * dt).unwrap();
        let solver = SolverConfig::new(dt, StepMethod::Rk4, 1).unwrap();
        let traj = simulate(&pair, &stim, &solver).unwrap();
        let Topology::SeriesPair { m1, m2 } = &pair else { unreachable!() };
        let eta = m1.polarity().value();
        let m0 = m1.r_init() + m2.r_init();
        let slope = eta * (m1.delta_r() - m2.delta_r()) / m1.q0();
        for s in &traj.samples {
            let x2 = s.x2.expect("series samples carry x2");
            if !(s.x1 > 0.0 && s.x1 < 1.0 && x2 > 0.0 && x2 < 1.0) {
                break; // a clamped device leaves the charge-linear law
            }
            let predicted = m0 - slope * s.q;
            let rel = (s.m_total - predicted).abs() / s.m_total;
            prop_assert!(rel <= 1e-9, "law broken by rel {rel} at t = {}", s.t);
            let m1_predicted = m1.r_init() - eta * m1.delta_r() * s.q / m1.q0();
            let rel_m1 = (s.m1 - m1_predicted).abs() / s.m1;
            prop_assert!(rel_m1 <= 1e-8, "m1 law broken by rel {rel_m1} at t = {}", s.t);
        }
    }

    /// When the two swings match, the pair's total memristance is pinned:
    /// the charge-dependent parts cancel regardless of drive history.
    #[test]
    fn matched_swings_pin_the_total(
        r_on1 in 100.0..1e3f64,
        r_on2 in 100.0..1e3f64,
        delta in 1e3..1e5f64,
        pos1 in 0.05..0.95f64,
        pos2 in 0.05..0.95f64,
        lq0 in -8.0..-2.0f64,
        amplitude in 0.1..2.0f64,
    ) {
        let q0 = 10f64.powf(lq0);
        let dev = |r_on: f64, pos: f64, positive: bool| {
            let r_off = r_on + delta;
            MemristorParams::new(
                r_on,
                r_off,
                (r_on + pos * delta).clamp(r_on, r_off),
                q0,
                polarity(positive),
                DriftModel::LinearDrift,
                2,
            )
            .unwrap()
        };
        let pair = Topology::series(dev(r_on1, pos1, true), dev(r_on2, pos2, false)).unwrap();
        let stim = PulseTrain::new(amplitude, 1e-3, 2e-3, 10, 0.0).unwrap();
        let solver = SolverConfig::new(1e-5, StepMethod::Rk4, 1).unwrap();
        let traj = simulate(&pair, &stim, &solver).unwrap();
        let m0 = traj.samples[0].m_total;
        for s in &traj.samples {
            let x2 = s.x2.expect("series samples carry x2");
            if !(s.x1 > 0.0 && s.x1 < 1.0 && x2 > 0.0 && x2 < 1.0) {
                break; // pinning only holds while neither device clamps
            }
            let rel = (s.m_total - m0).abs() / m0;
            prop_assert!(rel <= 1e-9, "pinned total drifted by rel {rel} at t = {}", s.t);
        }
    }
}

/// Stimulus and solver drawn together so dt always resolves the width.
fn any_stim_solver() -> impl Strategy<Value = (PulseTrain, SolverConfig)> {
    (
        -10.0..10.0f64,  // amplitude
        -4.0..-2.0f64,   // log10 width
        1.0..10.0f64,    // period / width
        1u32..1000,      // count
        -1.0..1.0f64,    // baseline
        0.01..1.0f64,    // dt as a fraction of width / 10
        1u32..100,       // record_stride
        prop::bool::ANY, // method
    )
        .prop_map(
            |(amplitude, lwidth, mult, count, baseline, dt_frac, stride, rk4)| {
                let width = 10f64.powf(lwidth);
                let stim =
                    PulseTrain::new(amplitude, width, width * mult, count, baseline).unwrap();
                let method = if rk4 {
                    StepMethod::Rk4
                } else {
                    StepMethod::Euler
                };
                let solver = SolverConfig::new(width / 10.0 * dt_frac, method, stride).unwrap();
                (stim, solver)
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Any constructible experiment survives serialize -> parse intact.
    #[test]
    fn experiments_round_trip_through_text(
        single in prop::bool::ANY,
        d1 in any_device(),
        d2 in any_device(),
        (stim, solver) in any_stim_solver(),
        label in "[ -~]{0,30}",
    ) {
        let topology = if single {
            Topology::Single(d1)
        } else {
            let d2 = MemristorParams::new(
                d2.r_on(),
                d2.r_off(),
                d2.r_init(),
                d2.q0(),
                d1.polarity().opposite(),
                d2.model(),
                d2.window_p(),
            )
            .unwrap();
            Topology::series(d1, d2).unwrap()
        };
        let exp = Experiment::new(topology, stim, solver, &label).unwrap();
        let text = serialize_experiment(&exp);
        let back = parse_experiment(&text);
        prop_assert_eq!(back.as_ref(), Ok(&exp), "file was:\n{}", text);
    }
}

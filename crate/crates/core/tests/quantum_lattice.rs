mod common;

use collapse_core::quantum_lattice::*;
use collapse_core::LatticeModel64;
use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn generator_dense(g: &IndexedGenerator<f64>) -> DMatrix<Complex64> {
    dense_from_entries(g.dim(), g.operator().entries())
}

fn packet_state(model: &LatticeModel64, seed: u64) -> Vec<Complex64> {
    let l = model.n_sites;
    let particle = wave_packet(l, 0.0, 0.8, 0.7);
    let atoms: Vec<_> = (0..model.n_atoms)
        .map(|a| wave_packet(l, (l as f64 / 2.0) + a as f64 * 0.5, 0.9, -0.3 + 0.1 * seed as f64))
        .collect();
    product_state(model, &particle, &atoms).unwrap()
}

#[test]
fn free_generator_is_block_diagonal_kinetic() {
    let model = LatticeModel64::new(3, 2);
    let g = build_indexed_generator(&model).unwrap();
    let flow = check_directed_flow(&g);
    assert!(flow.directed);
    assert!(flow.inter_string_blocks.is_empty());
    let h = build_standard_hamiltonian(&model).unwrap();
    for s in 0..4 {
        let s = EntanglementString(s);
        let block = g.block(s, s);
        for (r, col, v) in h.entries() {
            assert_eq!(block.get(r, col), v);
        }
        assert_eq!(block.nnz(), h.nnz());
    }
}

#[test]
fn one_atom_two_sites_matches_hand_built_matrix() {
    let (jp, ja, u) = (0.7, 1.3, 2.5);
    let model = LatticeModel64::new(2, 1).with_hopping(ja, jp).with_couplings(u, 0.0);
    let g = build_indexed_generator(&model).unwrap();
    // configurations (y, x): 0 = (0,0), 1 = (1,0), 2 = (0,1), 3 = (1,1);
    // on two sites both ring neighbours coincide, doubling the hop
    let t = [
        [0.0, -2.0 * jp, -2.0 * ja, 0.0],
        [-2.0 * jp, 0.0, 0.0, -2.0 * ja],
        [-2.0 * ja, 0.0, 0.0, -2.0 * jp],
        [0.0, -2.0 * ja, -2.0 * jp, 0.0],
    ];
    let contact = [1.0, 0.0, 0.0, 1.0];
    // index matrix S + P1 with rows as target index
    let idx = [[0.0, 0.0], [1.0, 1.0]];
    let mut expected = DMatrix::<Complex64>::zeros(8, 8);
    for st in 0..2 {
        for ss in 0..2 {
            for ct in 0..4 {
                for cs in 0..4 {
                    let mut v = 0.0;
                    if st == ss {
                        v += t[ct][cs];
                    }
                    if ct == cs {
                        v += u * idx[st][ss] * contact[ct];
                    }
                    expected[(st * 4 + ct, ss * 4 + cs)] = c(v);
                }
            }
        }
    }
    assert_eq!(generator_dense(&g), expected);
    let up = g.block(EntanglementString(1), EntanglementString(0));
    assert_eq!(up.nnz(), 2);
    assert_eq!(up.get(0, 0), c(u));
    assert_eq!(up.get(3, 3), c(u));
}

#[test]
fn contagion_block_is_the_atom_atom_contact() {
    let v = 1.7;
    let model = LatticeModel64::new(2, 2).with_couplings(0.0, v);
    let g = build_indexed_generator(&model).unwrap();
    // string (1, 0) has index 1 on atom 0 only
    let from = EntanglementString::from_bits(&[true, false]);
    let to = EntanglementString::from_bits(&[true, true]);
    let block = g.block(to, from);
    for cfg in 0..8 {
        let (x0, x1) = ((cfg >> 1) & 1, (cfg >> 2) & 1);
        for other in 0..8 {
            let want = if cfg == other && x0 == x1 { c(v) } else { c(0.0) };
            assert_eq!(block.get(cfg, other), want, "entry ({cfg}, {other})");
        }
    }
    // mixed indices feel no diagonal contact
    let mixed = g.block(from, from);
    let h_free = build_standard_hamiltonian(&LatticeModel64::new(2, 2)).unwrap();
    for cfg in 0..8 {
        assert_eq!(mixed.get(cfg, cfg), h_free.get(cfg, cfg));
    }
    // no flow from a string back down or sideways
    assert_eq!(g.block(from, to).nnz(), 0);
    assert_eq!(g.block(EntanglementString::from_bits(&[false, true]), from).nnz(), 0);
}

#[test]
fn zero_time_is_identity() {
    let model = LatticeModel64::new(3, 2).with_couplings(1.0, 0.5);
    let g = build_indexed_generator(&model).unwrap();
    let psi0 = packet_state(&model, 0);
    let state = IndexedWaveState::from_standard(&model, &psi0).unwrap();
    assert_eq!(evolve_indexed(&state, &g, 0.0, 1e-9).unwrap(), state);
    assert_eq!(evolve_standard(&psi0, &model, 0.0, 1e-9).unwrap(), psi0);
}

#[test]
fn free_evolution_stays_on_the_empty_string() {
    let model = LatticeModel64::new(4, 2);
    let g = build_indexed_generator(&model).unwrap();
    let state = IndexedWaveState::from_standard(&model, &packet_state(&model, 1)).unwrap();
    let later = evolve_indexed(&state, &g, 3.0, 1e-9).unwrap();
    assert_eq!(later.support(0.0), vec![EntanglementString::EMPTY]);
    assert_eq!(later.time, 3.0);
}

#[test]
fn indexed_evolution_matches_dense_exponential() {
    let model = LatticeModel64::new(2, 1).with_couplings(1.4, 0.0).with_hopping(0.9, 1.1);
    let g = build_indexed_generator(&model).unwrap();
    let psi0 = packet_state(&model, 2);
    let state = IndexedWaveState::from_standard(&model, &psi0).unwrap();
    let t = 2.5;
    let later = evolve_indexed(&state, &g, t, 1e-11).unwrap();
    let oracle = propagate(&generator_dense(&g), state.amplitudes(), t);
    assert!(max_diff(later.amplitudes(), &oracle) < 1e-9);
}

#[test]
fn standard_evolution_matches_dense_exponential_and_keeps_norm() {
    let model = LatticeModel64::new(3, 2).with_couplings(1.0, -0.6);
    let h = build_standard_hamiltonian(&model).unwrap();
    let psi0 = packet_state(&model, 3);
    let out = evolve_standard(&psi0, &model, 10.0, 1e-11).unwrap();
    let oracle = propagate(&dense_from_entries(h.dim(), h.entries()), &psi0, 10.0);
    assert!(max_diff(&out, &oracle) < 1e-9);
    assert!((norm(&out) - 1.0).abs() < 1e-9);
}

#[test]
fn string_sum_basics() {
    let model = LatticeModel64::new(2, 1);
    let psi0 = packet_state(&model, 4);
    let state = IndexedWaveState::from_standard(&model, &psi0).unwrap();
    assert_eq!(string_sum(&state), psi0);

    let mut cancel = IndexedWaveState::zeros(&model);
    cancel.component_mut(EntanglementString(0)).copy_from_slice(&psi0);
    let neg: Vec<_> = psi0.iter().map(|z| -z).collect();
    cancel.component_mut(EntanglementString(1)).copy_from_slice(&neg);
    assert!(string_sum(&cancel).iter().all(|z| z.norm() == 0.0));
}

#[test]
fn string_sum_reproduces_standard_evolution() {
    let model = LatticeModel64::new(3, 2).with_couplings(2.0, 1.5);
    let g = build_indexed_generator(&model).unwrap();
    let psi0 = packet_state(&model, 5);
    let tol = 1e-10;
    let mut state = IndexedWaveState::from_standard(&model, &psi0).unwrap();
    for k in 1..=5 {
        let t = k as f64 * 1.5;
        state = evolve_indexed(&state, &g, t, tol).unwrap();
        let standard = evolve_standard(&psi0, &model, t, tol).unwrap();
        assert!(l2_diff(&string_sum(&state), &standard) <= 10.0 * tol, "t = {t}");
    }
}

#[test]
fn empty_string_never_feels_the_particle() {
    let model = LatticeModel64::new(3, 2).with_couplings(3.0, 1.0);
    let g = build_indexed_generator(&model).unwrap();
    let psi0 = packet_state(&model, 6);
    let state = IndexedWaveState::from_standard(&model, &psi0).unwrap();
    let later = evolve_indexed(&state, &g, 4.0, 1e-11).unwrap();
    let without_u = model.clone().with_couplings(0.0, 1.0);
    let reference = evolve_standard(&psi0, &without_u, 4.0, 1e-11).unwrap();
    assert!(max_diff(later.component(EntanglementString::EMPTY), &reference) < 1e-9);
}

#[test]
fn strings_depend_only_on_their_down_set() {
    let model = LatticeModel64::new(3, 3).with_couplings(1.5, 2.0);
    let g = build_indexed_generator(&model).unwrap();
    let full = {
        let mut s = IndexedWaveState::zeros(&model);
        s.amplitudes_mut().copy_from_slice(&random_vector(model.indexed_dimension(), 11));
        s
    };
    let later = evolve_indexed(&full, &g, 1.5, 1e-11).unwrap();
    for target in 0..8u32 {
        let target = EntanglementString(target);
        let mut trimmed = full.clone();
        for s in 0..8u32 {
            let s = EntanglementString(s);
            if !target.contains(s) {
                trimmed.component_mut(s).iter_mut().for_each(|z| *z = c(0.0));
            }
        }
        let trimmed_later = evolve_indexed(&trimmed, &g, 1.5, 1e-11).unwrap();
        assert!(max_diff(later.component(target), trimmed_later.component(target)) < 1e-9);
    }
}

#[test]
fn injected_lowering_block_breaks_directed_flow() {
    let model = LatticeModel64::new(2, 1).with_couplings(1.0, 0.0);
    let g = build_indexed_generator(&model).unwrap();
    assert!(check_directed_flow(&g).directed);
    // the adjoint of S: index 1 back to index 0 on a contact configuration
    let nc = g.n_configs();
    let bad = g.with_additional_couplings(vec![(0, nc, c(1.0))]);
    let report = check_directed_flow(&bad);
    assert!(!report.directed);
    assert_eq!(
        report.violations,
        vec![(EntanglementString(0), EntanglementString(1))]
    );
    assert!(bad.flags.injected);
}

#[test]
fn generator_is_not_self_adjoint_with_contact_terms() {
    for (u, v) in [(1.0, 0.0), (0.0, 1.0), (0.3, -2.0)] {
        let model = LatticeModel64::new(3, 2).with_couplings(u, v);
        let g = build_indexed_generator(&model).unwrap();
        let w = non_self_adjointness_witness(&g, 1e-12).expect("witness");
        assert!(w.gap > 1e-12);
        let dim = g.dim();
        let phi = random_vector(dim, 1);
        let psi = random_vector(dim, 2);
        assert!(adjoint_gap(&g, &phi, &psi) > 1e-12);
    }
    let free = build_indexed_generator(&LatticeModel64::new(3, 2)).unwrap();
    assert!(non_self_adjointness_witness(&free, 1e-12).is_none());
}

#[test]
fn initial_fractions_are_all_non_entangled() {
    let model = LatticeModel64::new(4, 2).with_couplings(1.0, 1.0);
    let state = IndexedWaveState::from_standard(&model, &packet_state(&model, 7)).unwrap();
    let cells = CellPartition::contiguous(4, 2).unwrap();
    let report = entanglement_fractions(&model, &state, &cells).unwrap();
    for cell in &report.cells {
        assert_eq!(cell.f1, Some(0.0));
        assert_eq!(cell.f0, Some(1.0));
    }
    assert_eq!(report.global_n1, 0.0);
}

#[test]
fn empty_cells_are_marked_undefined() {
    let model = LatticeModel64::new(4, 1);
    let mut psi = vec![c(0.0); model.n_configs()];
    psi[model.config_index(0, &[0])] = c(1.0);
    let state = IndexedWaveState::from_standard(&model, &psi).unwrap();
    let cells = CellPartition::contiguous(4, 2).unwrap();
    let report = entanglement_fractions(&model, &state, &cells).unwrap();
    assert_eq!(report.cells[1].f1, None);
    assert_eq!(report.cells[1].f0, None);
    assert!(CellPartition::new(4, vec![vec![0, 1], vec![1, 2, 3]]).is_err());
    assert!(CellPartition::new(4, vec![vec![0, 1], vec![2]]).is_err());
}

fn contagion_run(model: &LatticeModel64, t_max: f64, samples: usize) -> Vec<FractionReport<f64>> {
    let g = build_indexed_generator(model).unwrap();
    let mut state = IndexedWaveState::from_standard(model, &packet_state(model, 8)).unwrap();
    let cells = CellPartition::contiguous(model.n_sites, 2).unwrap();
    let mut out = vec![entanglement_fractions(model, &state, &cells).unwrap()];
    for k in 1..=samples {
        state = evolve_indexed(&state, &g, t_max * k as f64 / samples as f64, 1e-10).unwrap();
        out.push(entanglement_fractions(model, &state, &cells).unwrap());
    }
    out
}

// Each scenario is sampled over its contagion phase, before the fractions
// saturate and start to wobble.
#[test]
fn fractions_stay_normalized_and_contagion_is_monotone() {
    let scenarios = [
        (LatticeModel64::new(4, 2).with_couplings(2.0, 2.0), 4.0),
        (LatticeModel64::new(3, 3).with_couplings(1.0, 3.0), 3.0),
        (LatticeModel64::new(5, 2).with_couplings(1.0, 1.0), 8.0),
    ];
    for (model, t_max) in &scenarios {
        let reports = contagion_run(model, *t_max, 32);
        for pair in reports.windows(2) {
            assert!(
                pair[1].global_n1 >= pair[0].global_n1 - 1e-9,
                "{model:?}: {} then {}",
                pair[0].global_n1,
                pair[1].global_n1
            );
        }
        for r in &reports {
            for cell in &r.cells {
                if let (Some(f1), Some(f0)) = (cell.f1, cell.f0) {
                    assert!((f1 + f0 - 1.0).abs() < 1e-9);
                }
            }
            assert!((r.string_sum_norm_sq - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn strong_coupling_entangles_most_atoms() {
    let model = LatticeModel64::new(3, 3).with_couplings(1.0, 3.0);
    let reports = contagion_run(&model, 20.0, 10);
    let last = reports.last().unwrap();
    assert!(last.global_f1 > 0.8, "global f1 = {}", last.global_f1);
    assert!(last.global_f1 < 1.0);
}

#[test]
fn symmetric_channels_share_fractions() {
    let model = LatticeModel64::new(3, 2).with_couplings(1.5, 1.0);
    let psi0 = packet_state(&model, 9);
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let state =
        ChannelResolvedState::new(vec![model.clone(), model.clone()], vec![amp, amp], &psi0).unwrap();
    let later = state.evolve(3.0, 1e-10).unwrap();
    let cells = CellPartition::contiguous(3, 3).unwrap();
    let report = later.fractions(&cells).unwrap();
    for cell in &report.cells {
        let (f1, f2) = (cell.f[0].unwrap(), cell.f[1].unwrap());
        assert_eq!(f1, f2);
        let f0 = cell.f0.unwrap();
        assert!((f0 - (1.0 - 0.5 * f1 - 0.5 * f2)).abs() < 1e-9);
    }
}

#[test]
fn bose_symmetry_is_kept_by_the_dynamics() {
    let model = LatticeModel64::new(4, 2).with_couplings(1.0, 2.0).with_symmetrize(true);
    let g = build_indexed_generator(&model).unwrap();
    let psi0 = packet_state(&model, 10);
    let state = IndexedWaveState::from_standard(&model, &psi0).unwrap();
    assert!(bose_symmetry_defect(&model, &state) < 1e-14);
    let later = evolve_indexed(&state, &g, 2.0, 1e-10).unwrap();
    assert!(bose_symmetry_defect(&model, &later) < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn equivalence_holds_for_random_models(
        n_sites in 2usize..5,
        n_atoms in 1usize..3,
        u in -3.0f64..3.0,
        v in -3.0f64..3.0,
        t in 0.0f64..3.0,
        seed in 0u64..1000,
    ) {
        let model = LatticeModel64::new(n_sites, n_atoms).with_couplings(u, v);
        let g = build_indexed_generator(&model).unwrap();
        prop_assert!(check_directed_flow(&g).directed);
        let psi0 = random_vector(model.n_configs(), seed);
        let state = IndexedWaveState::from_standard(&model, &psi0).unwrap();
        let tol = 1e-10;
        let a = string_sum(&evolve_indexed(&state, &g, t, tol).unwrap());
        let b = evolve_standard(&psi0, &model, t, tol).unwrap();
        prop_assert!(l2_diff(&a, &b) <= 10.0 * tol);
    }
}

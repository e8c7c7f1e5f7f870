use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;
use seriation_core::graphon::nice_catalog;
use seriation_core::rng::stream;
use seriation_core::spectral::{spectral_seriation_detailed, DEFAULT_TOLERANCE};
use seriation_core::*;

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| m.get(i, j))
}

/// Eigenvalues ascending with matching eigenvectors, from a full decomposition.
fn oracle(m: &DenseMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(to_nalgebra(m));
    let mut idx: Vec<usize> = (0..m.dim()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = idx.iter().map(|&k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
    (values, vectors)
}

fn sign_aligned_distance(a: &[f64], b: &[f64]) -> f64 {
    let plus: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let minus: f64 = a.iter().zip(b).map(|(x, y)| (x + y).powi(2)).sum();
    plus.min(minus).sqrt()
}

fn weights_from_edges(n: usize, edges: &[(usize, usize)]) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n);
    for &(i, j) in edges {
        m.set(i, j, 1.0);
        m.set(j, i, 1.0);
    }
    m
}

/// Connected weighted graph: a random spanning path plus random extra weights.
fn random_weights(rng: &mut impl Rng, n: usize, density: f64) -> DenseMatrix {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut m = DenseMatrix::zeros(n);
    for w in order.windows(2) {
        let x = rng.gen_range(0.1..1.0);
        m.set(w[0], w[1], x);
        m.set(w[1], w[0], x);
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                let x = m.get(i, j) + rng.gen_range(0.0..1.0);
                m.set(i, j, x);
                m.set(j, i, x);
            }
        }
    }
    m
}

#[test]
fn laplacian_examples() {
    let p3 = laplacian(&weights_from_edges(3, &[(0, 1), (1, 2)])).unwrap().to_dense();
    let expected = [[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]];
    for i in 0..3 {
        assert_eq!(p3.row(i), &expected[i]);
    }

    let empty = laplacian(&DenseMatrix::zeros(4)).unwrap().to_dense();
    assert!(empty.as_slice().iter().all(|&x| x == 0.0));

    let k3 = laplacian(&weights_from_edges(3, &[(0, 1), (1, 2), (0, 2)])).unwrap().to_dense();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(k3.get(i, j), if i == j { 2.0 } else { -1.0 });
        }
    }

    let mut asym = DenseMatrix::zeros(2);
    asym.set(0, 1, 1.0);
    assert!(matches!(laplacian(&asym), Err(SeriationError::InvalidArgument(_))));
}

#[test]
fn laplacian_rows_sum_to_zero_and_matrix_is_psd() {
    let mut rng = stream(11);
    for n in [5, 40, 120] {
        let l = laplacian(&random_weights(&mut rng, n, 0.3)).unwrap().to_dense();
        for i in 0..n {
            assert!(l.row(i).iter().sum::<f64>().abs() <= 1e-12 * n as f64 * 10.0);
            assert!(l.get(i, i) >= 0.0);
        }
        assert!(l.is_symmetric(0.0));
        assert!(oracle(&l).0[0] >= -1e-9);
    }
}

#[test]
fn fiedler_pair_examples() {
    let path: Vec<(usize, usize)> = (0..7).map(|i| (i, i + 1)).collect();
    let res = fiedler_pair(&laplacian(&weights_from_edges(8, &path)).unwrap(), DEFAULT_TOLERANCE).unwrap();
    let exact = 2.0 * (1.0 - (std::f64::consts::PI / 8.0).cos());
    assert!((res.fiedler_value() - exact).abs() < 1e-10);

    let k6: Vec<(usize, usize)> = (0..6).flat_map(|i| (i + 1..6).map(move |j| (i, j))).collect();
    let res = fiedler_pair(&laplacian(&weights_from_edges(6, &k6)).unwrap(), DEFAULT_TOLERANCE).unwrap();
    assert!((res.fiedler_value() - 6.0).abs() < 1e-10);
    assert!(res.degenerate);

    let triangles = weights_from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
    let err = fiedler_pair(&laplacian(&triangles).unwrap(), DEFAULT_TOLERANCE).unwrap_err();
    assert!(matches!(err, SeriationError::Disconnected(_)));
}

#[test]
fn fiedler_pair_matches_full_decomposition() {
    let mut rng = stream(2024);
    for case in 0..30 {
        let n = rng.gen_range(3..=200);
        let density = rng.gen_range(0.0..0.5);
        let w = random_weights(&mut rng, n, density);
        let l = laplacian(&w).unwrap();
        let res = fiedler_pair(&l, DEFAULT_TOLERANCE).unwrap();
        let (values, vectors) = oracle(&l.to_dense());
        assert!((res.eigenvalues[0] - values[0]).abs() < 1e-6, "case {case}");
        assert!((res.fiedler_value() - values[1]).abs() < 1e-6, "case {case}");
        if n > 2 {
            assert!((res.eigenvalues[2] - values[2]).abs() < 1e-6, "case {case}");
        }
        if values[2] - values[1] > 1e-3 {
            assert!(sign_aligned_distance(&res.fiedler, &vectors[1]) < 1e-5, "case {case}");
        }
    }
}

#[test]
fn fiedler_vector_normalisation_and_orientation() {
    let mut rng = stream(5);
    for _ in 0..10 {
        let n = rng.gen_range(10..150);
        let l = laplacian(&random_weights(&mut rng, n, 0.2)).unwrap();
        let res = fiedler_pair(&l, DEFAULT_TOLERANCE).unwrap();
        let norm: f64 = res.fiedler.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-8);
        assert!(res.fiedler.iter().sum::<f64>().abs() <= 1e-8);
        let moment: f64 = res.fiedler.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum();
        assert!(moment >= 0.0);
        assert!(res.eigenvalues[0] >= -1e-8);
        assert!(res.residual <= DEFAULT_TOLERANCE * l.norm_bound().max(1.0));
    }
}

#[test]
fn lanczos_agrees_with_dense_solver() {
    let mut rng = stream(77);
    for n in [60, 300, 700] {
        let g = sample_graph(&Graphon::affine_distance(0.8, 1.0).unwrap(), n, 1.0, rng.gen()).unwrap();
        let l = LaplacianMatrix::from_graph(&g);
        let dense = fiedler_pair_with(&l, DEFAULT_TOLERANCE, SolverMethod::Dense).unwrap();
        let lanczos = fiedler_pair_with(&l, DEFAULT_TOLERANCE, SolverMethod::Lanczos).unwrap();
        assert!((dense.fiedler_value() - lanczos.fiedler_value()).abs() < 1e-6 * dense.fiedler_value().max(1.0));
        assert!(sign_aligned_distance(&dense.fiedler, &lanczos.fiedler) < 1e-5);
        assert_eq!(lanczos.method, SolverMethod::Lanczos);
    }
}

#[test]
fn large_graphs_use_the_sparse_path() {
    let g = sample_graph(&Graphon::affine_distance(0.8, 1.0).unwrap(), 2100, 1.0, 9).unwrap();
    let l = LaplacianMatrix::from_graph(&g);
    assert!(!l.is_dense());
    let res = fiedler_pair(&l, DEFAULT_TOLERANCE).unwrap();
    assert_eq!(res.method, SolverMethod::Lanczos);
    let sigma = spectral_seriation(&g, DEFAULT_TOLERANCE).unwrap();
    let err = linf_distance(&sigma, &Ordering::identity(2100), true).unwrap();
    assert!(err / 2100.0 < 0.1, "relative sup error {}", err / 2100.0);
}

#[test]
fn seriation_of_banded_graphs_is_exact() {
    let g = SampledGraph::banded(30, 3);
    let sigma = spectral_seriation(&g, DEFAULT_TOLERANCE).unwrap();
    assert_eq!(linf_distance(&sigma, &Ordering::identity(30), true).unwrap(), 0.0);
}

#[test]
fn complete_graph_gives_a_bijection() {
    let n = 12;
    let edges: Vec<(usize, usize)> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
    let g = SampledGraph::from_edges(n, edges).unwrap();
    let (sigma, res) = spectral_seriation_detailed(&g, DEFAULT_TOLERANCE).unwrap();
    assert!(res.degenerate);
    let mut ranks = sigma.ranks().to_vec();
    ranks.sort_unstable();
    assert_eq!(ranks, (1..=n).collect::<Vec<_>>());
}

#[test]
fn relabelled_band_is_recovered_up_to_reversal() {
    let n = 40;
    let mut rng = stream(3);
    let mut pi: Vec<usize> = (1..=n).collect();
    pi.shuffle(&mut rng);
    // Vertex `pi[k]` sits at latent position `k + 1`.
    let band = SampledGraph::banded(n, 4);
    let g = SampledGraph::from_edges(n, band.edges().map(|(i, j)| (pi[i - 1], pi[j - 1]))).unwrap();
    let sigma = spectral_seriation(&g, DEFAULT_TOLERANCE).unwrap();
    let truth = Ordering::from_vertices_by_rank(&pi).unwrap();
    assert_eq!(linf_distance(&sigma, &truth, true).unwrap(), 0.0);
}

#[test]
fn discretized_operator_examples() {
    let one = discretized_graphon_laplacian(&Graphon::constant(1.0).unwrap(), 50).unwrap();
    let res = fiedler_pair(&one, DEFAULT_TOLERANCE).unwrap();
    assert!((res.fiedler_value() - 1.0).abs() < 1e-9);

    for (name, g) in nice_catalog() {
        let res = fiedler_pair(&discretized_graphon_laplacian(&g, 200).unwrap(), DEFAULT_TOLERANCE).unwrap();
        assert!(res.eigenvalues[0].abs() < 1e-9, "{name}");
    }

    let affine = Graphon::affine_distance(0.8, 1.0).unwrap();
    let l400 = fiedler_pair(&discretized_graphon_laplacian(&affine, 400).unwrap(), DEFAULT_TOLERANCE).unwrap();
    let l800 = fiedler_pair(&discretized_graphon_laplacian(&affine, 800).unwrap(), DEFAULT_TOLERANCE).unwrap();
    assert!((l400.fiedler_value() - l800.fiedler_value()).abs() < 2.0 / 400.0);
}

#[test]
fn operator_norm_diff_examples() {
    let affine = Graphon::affine_distance(0.8, 1.0).unwrap();
    let l100 = discretized_graphon_laplacian(&affine, 100).unwrap();
    assert_eq!(operator_norm_diff(&l100, &l100).unwrap(), 0.0);

    let c = Graphon::constant(0.7).unwrap();
    let (c100, c200) =
        (discretized_graphon_laplacian(&c, 100).unwrap(), discretized_graphon_laplacian(&c, 200).unwrap());
    assert!(operator_norm_diff(&c100, &c200).unwrap() < 1e-12);

    let l1600 = discretized_graphon_laplacian(&affine, 1600).unwrap();
    assert!(operator_norm_diff(&l100, &l1600).unwrap() <= 4.0 * 0.8 / 100.0);

    let l150 = discretized_graphon_laplacian(&affine, 150).unwrap();
    assert!(matches!(operator_norm_diff(&l100, &l150), Err(SeriationError::InvalidArgument(_))));
}

/// Dense oracle for the norm difference: replicate the coarse kernel explicitly.
#[test]
fn operator_norm_diff_matches_explicit_replication() {
    let g = Graphon::rbf(0.3).unwrap();
    let (coarse, fine) = (20, 60);
    let r = fine / coarse;
    let lc = discretized_graphon_laplacian(&g, coarse).unwrap();
    let lf = discretized_graphon_laplacian(&g, fine).unwrap();
    let kernel = |i: usize, j: usize| g.kernel((i / r + 1) as f64 / coarse as f64, (j / r + 1) as f64 / coarse as f64);
    let replicated = DenseMatrix::from_fn(fine, |i, j| if i == j { 0.0 } else { kernel(i, j) });
    let lr = laplacian(&replicated).unwrap().to_dense();
    let lf = lf.to_dense();
    // `to_dense` applies the 1/resolution scale already.
    let diff = DMatrix::from_fn(fine, fine, |i, j| lr.get(i, j) / fine as f64 - lf.get(i, j));
    let expected = SymmetricEigen::new(diff).eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let got = operator_norm_diff(&lc, &discretized_graphon_laplacian(&g, fine).unwrap()).unwrap();
    assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
}

#[test]
fn nice_graphons_have_monotone_fiedler_vectors_and_stable_gaps() {
    for (name, g) in nice_catalog() {
        let mut gaps = Vec::new();
        for res in [200, 500, 1000] {
            let r = fiedler_pair(&discretized_graphon_laplacian(&g, res).unwrap(), DEFAULT_TOLERANCE).unwrap();
            assert!(r.fiedler.windows(2).all(|w| w[1] > w[0]), "{name} at {res}");
            assert!(r.fiedler_value() < (1..=res).map(|i| g.degree_function(i as f64 / res as f64, 2000).unwrap()).fold(f64::INFINITY, f64::min));
            gaps.push(r.gap3);
        }
        assert!((gaps[2] - gaps[1]).abs() <= 0.25 * gaps[1], "{name}: {gaps:?}");
    }
}

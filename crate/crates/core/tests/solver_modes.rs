use parsearch::boundary::contact_set;
use parsearch::grid::{read_field_csv, truncation_boundary_values, write_field_csv};
use parsearch::solver::{self, lcp_residual, Action};
use parsearch::{Cost, Error, GridSpec, SearchMode, Solution, SolverConfig};

fn solve(mode: SearchMode, grid: &GridSpec) -> Solution {
    let bc = truncation_boundary_values(grid, &mode).unwrap();
    solver::solve(&mode, grid, &bc, &SolverConfig::for_mode(&mode)).unwrap()
}

fn coarse() -> GridSpec {
    GridSpec::cube(2, -4.0, 8.0, 1.0 / 20.0).unwrap()
}

#[test]
fn sequential_searches_the_leader() {
    let grid = coarse();
    let sol = solve(SearchMode::sequential(0.5).unwrap(), &grid);
    let policy = sol.policy.as_ref().unwrap();
    for n in 0..grid.len() {
        let x = grid.coords(n);
        match policy.get(n) {
            Action::Stop | Action::Parallel if x[0] == x[1] => {}
            Action::Stop => {}
            Action::Search(i) => assert!(x[i] >= x[1 - i], "{x:?}"),
            Action::Parallel => panic!("sequential policy chose PARALLEL at {x:?}"),
        }
    }
    assert!(policy.count(Action::Search(0)) > 0 && policy.count(Action::Search(1)) > 0);
}

#[test]
fn parallel_region_grows_as_search_cost_approaches_parallel_cost() {
    let grid = coarse();
    let counts: Vec<usize> = [0.55, 0.75, 0.99]
        .iter()
        .map(|f| {
            let sol = solve(SearchMode::hybrid(1.0, *f).unwrap(), &grid);
            sol.policy.unwrap().count(Action::Parallel)
        })
        .collect();
    assert!(counts[0] <= counts[1] && counts[1] <= counts[2], "{counts:?}");
    assert!(counts[2] > 0);
}

#[test]
fn hybrid_window_is_enforced() {
    let err = SearchMode::hybrid(1.0, 0.4).unwrap_err();
    assert!(err.to_string().contains("c/2 < cprime < c"));
    assert!(SearchMode::hybrid(1.0, 1.0).is_err());
}

#[test]
fn solved_fields_satisfy_the_complementarity_conditions() {
    let grid = coarse();
    for mode in [
        SearchMode::parallel(1.0).unwrap(),
        SearchMode::sequential(0.5).unwrap(),
        SearchMode::hybrid(1.0, 2.0 / 3.0).unwrap(),
    ] {
        let sol = solve(mode, &grid);
        let r = lcp_residual(&sol.u, &sol.obstacle, &mode).unwrap();
        assert!(r <= 1e-8 * mode.min_cost() * 1.0001, "{mode}: residual {r}");
        assert!(sol.diagnostics.final_residual <= 1e-8 * mode.min_cost() * 1.0001);
        for (u, g) in sol.u.values().iter().zip(sol.obstacle.values()) {
            assert!(u >= g);
        }
        let json = serde_json::to_value(&sol.diagnostics).unwrap();
        assert!(json["sweeps"].as_u64().unwrap() > 0);
    }
}

#[test]
fn cost_monotonicity_holds_for_search_costs_too() {
    let grid = coarse();
    let cheap = solve(SearchMode::sequential(0.6).unwrap(), &grid);
    let dear = solve(SearchMode::sequential(0.9).unwrap(), &grid);
    for (a, b) in cheap.u.values().iter().zip(dear.u.values()) {
        assert!(a >= b);
    }
}

#[test]
fn three_dimensional_parallel_solve_is_consistent_with_two() {
    // A third alternative far below the others changes nothing beyond the
    // O(h²) difference between the two stencils.
    let c = Cost::new(1.0).unwrap();
    let mode = SearchMode::Parallel { c };
    let g3 = GridSpec::new(vec![-3.0, -3.0, -3.0], vec![4.0, 4.0, 3.0], 0.1).unwrap();
    let u3 = solve(mode, &g3);
    let g2 = GridSpec::new(vec![-3.0, -3.0], vec![4.0, 4.0], 0.1).unwrap();
    let u2 = solve(mode, &g2);
    for p in [[0.0, 0.0], [0.5, -0.2], [1.0, 1.0]] {
        let a = u3.u.at(&[p[0], p[1], -2.0]).unwrap();
        let b = u2.u.at(&p).unwrap();
        assert!((a - b).abs() <= 0.01, "{p:?}: {a} vs {b}");
    }
}

#[test]
fn field_csv_round_trips_a_solution() {
    let grid = GridSpec::cube(2, -2.0, 3.0, 0.1).unwrap();
    let sol = solve(SearchMode::parallel(1.0).unwrap(), &grid);
    let mask = contact_set(&sol.u, &sol.obstacle, sol.diagnostics.contact_tol).unwrap();
    let mut buf = Vec::new();
    write_field_csv(&mut buf, &sol.u, &sol.obstacle, &mask).unwrap();
    let (u, m) = read_field_csv(buf.as_slice(), &grid).unwrap();
    assert_eq!(u.values(), sol.u.values());
    assert_eq!(m.flags(), mask.flags());
}

#[test]
fn too_small_domains_are_rejected() {
    let grid = GridSpec::cube(2, -0.3, 0.3, 0.05).unwrap();
    let mode = SearchMode::parallel(1.0).unwrap();
    assert!(matches!(
        truncation_boundary_values(&grid, &mode),
        Err(Error::DomainTooSmall(_))
    ));
}

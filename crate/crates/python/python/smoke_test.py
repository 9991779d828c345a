"""Quick end-to-end check of the extension module."""

import itertools

import blockgraver as bg


def brute_force(inst):
    rows = inst.matrix()
    toml = inst.to_toml()
    fields = {}
    for line in toml.splitlines():
        if line.startswith(("lower", "upper", "rhs")):
            key, value = line.split(" = ")
            fields[key] = eval(value)
    best = None
    ranges = [range(lo, hi + 1) for lo, hi in zip(fields["lower"], fields["upper"])]
    for x in itertools.product(*ranges):
        if all(sum(a * b for a, b in zip(row, x)) == r for row, r in zip(rows, fields["rhs"])):
            value = inst.objective_value(list(x))
            best = value if best is None else max(best, value)
    return best


def main():
    for seed in range(5):
        inst = bg.TwoStageInstance.random(seed, n=2, max_width=3)
        report = bg.solve(inst)
        assert report.status == "optimal", report
        assert inst.is_feasible(report.solution)
        assert report.objective == brute_force(inst), (seed, report)
        again = bg.TwoStageInstance.from_toml(inst.to_toml())
        assert again.to_toml() == inst.to_toml()
        tree = bg.solve(inst.to_tree())
        assert tree.objective == report.objective
        exact = bg.solve(inst, head_cap="bound")
        assert exact.objective == report.objective

    tree = bg.TreeInstance.random(3)
    assert tree.depth == 2 and tree.num_blocks == 7
    assert bg.solve(tree, head_cap=4).status == "optimal"

    basis, truncated = bg.graver_basis([[1, 1, 1]])
    assert sorted(basis) == sorted([[1, -1, 0], [-1, 1, 0], [1, 0, -1], [-1, 0, 1], [0, 1, -1], [0, -1, 1]])
    assert not truncated
    assert bg.graver_norm_bound(2, 3) == 169

    perm, radius = bg.steinitz_reorder([[2, 1], [-1, 2], [-1, -2], [1, -1], [-1, 0]], 2)
    assert sorted(perm) == list(range(5)) and radius <= 4

    gens, witnesses = bg.intersect_cones([[[2]], [[3]]], 3)
    assert gens == [[6]] and witnesses == [[[3], [2]]]

    subsets, common = bg.common_submultisets([[[3], [3]], [[2], [2], [2]]], 3)
    assert common == [6] and subsets == [[[3], [3]], [[2], [2], [2]]]

    matrix, minimum, witness = bg.lower_bound("harmonic", 7)
    assert minimum == 420 and witness[0] == 420 and len(matrix) == 6
    assert bg.lower_bound("encoded", 2, 2)[1] == 420
    assert bg.subrep_size_bound(1, 1) == 3267
    assert bg.tower_bound([2], 1, 2) == 65536

    try:
        bg.lower_bound("cubic", 2)
    except bg.BlockGraverError:
        pass
    else:
        raise AssertionError("unknown family accepted")
    try:
        bg.tower_bound([2, 2], 2, 2)
    except bg.BudgetError:
        pass
    else:
        raise AssertionError("oversized bound accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()

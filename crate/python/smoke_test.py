"""Quick end-to-end check of the Python bindings.

Build and install first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/dbar-*.whl
"""

import dbar


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    x = dbar.ChainSpec.markov(1, [0.2, 0.4])
    y = dbar.ChainSpec.markov(1, [0.5, 0.7])
    ordered, witness = dbar.check_order(x, y)
    assert ordered and witness is None

    ordered, witness = dbar.check_order(dbar.ChainSpec.iid(0.6), dbar.ChainSpec.iid(0.5))
    assert not ordered and witness

    pair = dbar.CoupledPair(x, y)
    assert close(pair.alpha(0), 0.8)
    assert close(pair.lambda_k(1), 0.2)
    assert close(pair.r_lower("01", "", ""), 0.3)
    assert close(pair.kernel("11", "1", "1"), 0.4)

    path = pair.perfect_sample(-5, 20, seed=3)
    assert len(path["t"]) == 26 and path["T"] <= -5
    assert all(a <= b for a, b in zip(path["x"], path["y"]))

    report = pair.estimate_dbar(replicas=50, window=2000, seed=1)
    assert close(report["theoretical_dbar"], 0.375)
    assert report["pass"], report

    renewal_x = dbar.ChainSpec.renewal_geometric(0.4, 0.2, 0.5)
    value, se, bias = dbar.marginal_oracle(renewal_x)
    sim, sim_se, sim_bias = renewal_x.marginal("forward_sim", length=200_000, seed=5)
    assert abs(value - sim) <= 3 * sim_se + sim_bias + bias

    try:
        dbar.ChainSpec.iid(1.3)
    except ValueError:
        pass
    else:
        raise AssertionError("probability 1.3 accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()

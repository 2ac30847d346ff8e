#!/usr/bin/env python3
"""Generates tests/data/qp_oracle_cases.hpp.

Solves the soft-margin SVM dual

    min 1/2 a'Qa - 1'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K_ij

with cvxopt's interior-point QP solver on seeded random instances and freezes
the resulting (w, b, objective) / decision values into a C++ header. The
generated header is committed; rerun this script only to regenerate it.
"""

import numpy as np
from cvxopt import matrix, solvers

solvers.options["show_progress"] = False
solvers.options["abstol"] = 1e-10
solvers.options["reltol"] = 1e-10
solvers.options["feastol"] = 1e-10

rng = np.random.default_rng(20160331)


def solve_dual(K, y, C):
    n = len(y)
    Q = np.outer(y, y) * K
    P = matrix(Q)
    q = matrix(-np.ones(n))
    G = matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = matrix(np.hstack([np.zeros(n), C * np.ones(n)]))
    A = matrix(y.astype(float), (1, n))
    b = matrix(0.0)
    sol = solvers.qp(P, q, G, h, A, b)
    alpha = np.array(sol["x"]).ravel()
    dual_obj = float(np.sum(alpha) - 0.5 * alpha @ Q @ alpha)
    return alpha, dual_obj


def bias_from_free(alpha, y, K, C):
    f0 = (alpha * y) @ K  # decision values without bias
    free = (alpha > 1e-6 * C) & (alpha < C * (1 - 1e-6))
    if not free.any():
        return None
    return float(np.mean(y[free] - f0[free]))


def gen_linear_case(n, dim, C):
    while True:
        half = n // 2
        Xp = rng.normal(loc=1.0, scale=0.8, size=(half, dim))
        Xn = rng.normal(loc=-1.0, scale=0.8, size=(n - half, dim))
        X = np.vstack([Xp, Xn])
        y = np.array([1] * half + [-1] * (n - half))
        K = X @ X.T
        alpha, dual_obj = solve_dual(K, y, C)
        b = bias_from_free(alpha, y, K, C)
        if b is None:
            continue  # resample until the bias is pinned by a free SV
        w = (alpha * y) @ X
        return X, y, C, w, b, dual_obj


def gen_rbf_case(n, C, gamma):
    while True:
        half = n // 2
        Sp = rng.uniform(0.45, 1.0, size=(half, 2))
        Sn = rng.uniform(0.0, 0.55, size=(n - half, 2))
        S = np.vstack([Sp, Sn])
        y = np.array([1] * half + [-1] * (n - half))
        d2 = ((S[:, None, :] - S[None, :, :]) ** 2).sum(-1)
        K = np.exp(-gamma * d2)
        alpha, dual_obj = solve_dual(K, y, C)
        b = bias_from_free(alpha, y, K, C)
        if b is None:
            continue
        decision = (alpha * y) @ K + b
        return S, y, C, gamma, decision, b, dual_obj


def fmt(x):
    return f"{x:.17g}"


def main():
    lines = []
    lines.append("// Frozen SVM dual-QP oracle cases; generated by")
    lines.append("// tests/oracles/gen_qp_cases.py (cvxopt interior-point solver).")
    lines.append("// Do not edit by hand.")
    lines.append("#pragma once")
    lines.append("")
    lines.append("#include <array>")
    lines.append("#include <vector>")
    lines.append("")
    lines.append("namespace qp_oracle {")
    lines.append("")
    lines.append("struct LinearCase {")
    lines.append("    double c;")
    lines.append("    std::vector<std::vector<double>> X;")
    lines.append("    std::vector<int> y;")
    lines.append("    std::vector<double> w;")
    lines.append("    double b;")
    lines.append("    double dual_objective;")
    lines.append("};")
    lines.append("")
    lines.append("struct RbfCase {")
    lines.append("    double c;")
    lines.append("    double gamma;")
    lines.append("    std::vector<std::array<double, 2>> S;")
    lines.append("    std::vector<int> y;")
    lines.append("    std::vector<double> decision;  // f(x_i) including bias")
    lines.append("    double b;")
    lines.append("    double dual_objective;")
    lines.append("};")
    lines.append("")

    linear_specs = [
        (6, 2, 1.0), (8, 2, 10.0), (10, 3, 1.0), (12, 2, 100.0), (14, 4, 0.5),
        (16, 2, 1.0), (18, 3, 10.0), (20, 2, 0.1), (20, 4, 1.0), (15, 2, 100.0),
    ]
    lines.append("inline const std::vector<LinearCase>& linear_cases() {")
    lines.append("    static const std::vector<LinearCase> cases = {")
    for n, dim, C in linear_specs:
        X, y, C, w, b, dual_obj = gen_linear_case(n, dim, C)
        rows = ", ".join("{" + ", ".join(fmt(v) for v in row) + "}" for row in X)
        ys = ", ".join(str(v) for v in y)
        ws = ", ".join(fmt(v) for v in w)
        lines.append("        {" + fmt(C) + ", {" + rows + "}, {" + ys + "}, {" + ws + "}, "
                     + fmt(b) + ", " + fmt(dual_obj) + "},")
    lines.append("    };")
    lines.append("    return cases;")
    lines.append("}")
    lines.append("")

    rbf_specs = [
        (6, 1.0, 1.0), (8, 10.0, 1.0), (10, 1.0, 10.0), (12, 100.0, 1.0), (14, 1.0, 0.5),
        (16, 10.0, 10.0), (18, 1.0, 1.0), (20, 0.5, 1.0), (20, 100.0, 10.0), (15, 1.0, 2.0),
    ]
    lines.append("inline const std::vector<RbfCase>& rbf_cases() {")
    lines.append("    static const std::vector<RbfCase> cases = {")
    for n, C, gamma in rbf_specs:
        S, y, C, gamma, decision, b, dual_obj = gen_rbf_case(n, C, gamma)
        rows = ", ".join("{{" + fmt(p[0]) + ", " + fmt(p[1]) + "}}" for p in S)
        ys = ", ".join(str(v) for v in y)
        ds = ", ".join(fmt(v) for v in decision)
        lines.append("        {" + fmt(C) + ", " + fmt(gamma) + ", {" + rows + "}, {" + ys
                     + "}, {" + ds + "}, " + fmt(b) + ", " + fmt(dual_obj) + "},")
    lines.append("    };")
    lines.append("    return cases;")
    lines.append("}")
    lines.append("")
    lines.append("}  // namespace qp_oracle")
    lines.append("")

    out = "\n".join(lines)
    with open("tests/data/qp_oracle_cases.hpp", "w") as f:
        f.write(out)
    print(f"wrote tests/data/qp_oracle_cases.hpp ({len(out)} bytes)")


if __name__ == "__main__":
    main()

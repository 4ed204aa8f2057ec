#!/usr/bin/env python3
"""External QP backend for shapelasso built on cvxopt.

usage: cvxopt_qp.py PROBLEM SOLUTION [EPS_FEAS EPS_KKT]

Reads the triplet problem format, solves  min 1/2 z'Pz + q'z  s.t. Az <= b
with cvxopt.solvers.qp and writes the solution format.
"""
import sys

import cvxopt
from cvxopt import solvers


def read_tokens(path):
    with open(path) as fh:
        return fh.read().split()


def parse(tokens):
    pos = 0

    def take():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def expect(tag):
        tok = take()
        if tok != tag:
            raise ValueError(f"expected {tag!r}, got {tok!r}")

    def triplets(tag, rows, cols):
        expect(tag)
        nnz = int(take())
        I, J, V = [], [], []
        for _ in range(nnz):
            I.append(int(take()))
            J.append(int(take()))
            V.append(float(take()))
        return cvxopt.spmatrix(V, I, J, (rows, cols))

    def vector(tag):
        expect(tag)
        n = int(take())
        return cvxopt.matrix([float(take()) for _ in range(n)], (n, 1), "d")

    expect("shapelasso-qp")
    if take() != "1":
        raise ValueError("unsupported format version")
    expect("vars")
    m = int(take())
    expect("constraints")
    r = int(take())
    P = triplets("P", m, m)
    q = vector("q")
    A = triplets("A", r, m)
    b = vector("b")
    return m, r, P, q, A, b


def fmt(x):
    return repr(float(x))


def main(argv):
    if len(argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    m, r, P, q, A, b = parse(read_tokens(argv[1]))
    eps = float(argv[3]) if len(argv) > 3 else 1e-6
    solvers.options["show_progress"] = False
    solvers.options["abstol"] = 1e-10
    solvers.options["reltol"] = 1e-10
    solvers.options["feastol"] = min(1e-9, eps * 1e-3)
    solvers.options["maxiters"] = 200
    if r == 0:
        G = cvxopt.spmatrix([], [], [], (0, m))
        h = cvxopt.matrix(0.0, (0, 1))
    else:
        G, h = A, b
    res = solvers.qp(P, q, G, h)
    status = {"optimal": "optimal", "primal infeasible": "infeasible"}.get(res["status"], "max_iter")
    z = res["x"] if res["x"] is not None else cvxopt.matrix(0.0, (m, 1))
    y = res["z"] if res["z"] is not None else cvxopt.matrix(0.0, (r, 1))
    with open(argv[2], "w") as fh:
        fh.write("shapelasso-qp-solution 1\n")
        fh.write(f"status {status}\n")
        fh.write(f"iterations {int(res.get('iterations') or 0)}\n")
        fh.write(f"z {m}\n")
        fh.writelines(fmt(v) + "\n" for v in z)
        fh.write(f"duals {r}\n")
        fh.writelines(fmt(v) + "\n" for v in y)
        fh.write("end\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))

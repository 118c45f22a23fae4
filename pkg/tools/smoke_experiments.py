"""Smoke test for experiments.py: run_experiment, run_sweep, table1_report."""

import time

from qnumdiff.experiments import (
    config_from_dict,
    run_experiment,
    run_sweep,
    table1_report,
)

t0 = time.time()

digital_delta = {
    "model": {"kind": "black_scholes", "payoff": "digital", "parameter": "P0",
              "x_window": [70.0, 130.0]},
    "job": {"method": "sum_in_qae", "m": 1, "eps_rel": 1e-2},
    "distribution": {"levels": 12},
    "run": {"trials": 5, "seed": 20260817},
}
cfg = config_from_dict(digital_delta)
code, blob = run_experiment(cfg)
print(f"[digital delta sum] exit={code} bytes={len(blob)} t={time.time()-t0:.1f}s")
code2, blob2 = run_experiment(cfg)
print(f"[determinism] rerun exit={code2} identical={blob == blob2}")
import json
payload = json.loads(blob)
print(f"  pass3eps={payload['pass3eps']}/{payload['trials']}"
      f" analytic={payload['analytic']:.6g} eps={payload['eps']:.4g}")
print(f"  oracleCalls={payload['oracleCalls']}")
print(f"  per_inv={payload['oracleCallsPerInvocation']} qubits={payload['qubitReport']}")
print(f"  notes={payload['notes']}")

sine_cfg = config_from_dict({
    "model": {"kind": "sine", "amplitude": 1.0, "frequency": 1.0},
    "job": {"method": "naive_smooth", "mode": "minimal", "m": 1,
            "eps": 1e-3, "x": 0.6},
    "run": {"trials": 3, "seed": 7},
})
code, blob = run_experiment(sine_cfg)
payload = json.loads(blob)
print(f"[sine naive minimal] exit={code} pass3eps={payload['pass3eps']}/3"
      f" n={payload['n']} h={payload['h']:.5g} t={time.time()-t0:.1f}s")

t1 = time.time()
rows, csv_blob = run_sweep(sine_cfg, [2.0**-5, 2.0**-7], trials=2)
print(f"[sweep sine] rows={len(rows)} t={time.time()-t1:.1f}s")
rows2, csv_blob2 = run_sweep(sine_cfg, [2.0**-5, 2.0**-7], trials=2)
print(f"[sweep determinism] identical={csv_blob == csv_blob2}")
print(csv_blob.decode().splitlines()[0])
print(csv_blob.decode().splitlines()[1])

t1 = time.time()
eps_list = [2.0**-4, 2.0**-5, 2.0**-6, 2.0**-7]
rows, t1_blob = table1_report(sine_cfg, eps_list, qubit_budget="small")
print(f"[table1 sine] rows={len(rows)} t={time.time()-t1:.1f}s")
for row in rows:
    if row["row"] == "cell":
        print(f"  slope {row['method']}:{row['mode']} = {row['slope']:.3f}")
    if row["row"] == "recommendation":
        print(f"  recommended={row['recommended']} agreement={row['agreement']}")

t1 = time.time()
rows, _ = table1_report(sine_cfg, eps_list, qubit_budget="large")
print(f"[table1 sine large] rows={len(rows)} t={time.time()-t1:.1f}s")
of_by_cell = {}
for row in rows:
    if row["row"] == "data":
        of_by_cell.setdefault((row["method"], row["mode"]), []).append(row["OF_total"])
    if row["row"] == "cell":
        print(f"  slope {row['method']}:{row['mode']} = {row['slope']:.3f}")
    if row["row"] == "recommendation":
        print(f"  recommended={row['recommended']} agreement={row['agreement']}")
for cell, ofs in of_by_cell.items():
    print(f"  OF {cell}: {ofs}")

t1 = time.time()
dig_sweep_cfg = config_from_dict({
    "model": {"kind": "black_scholes", "payoff": "digital", "parameter": "P0",
              "x_window": [70.0, 130.0]},
    "job": {"method": "sum_in_qae", "m": 1, "eps_rel": 1e-2},
    "distribution": {"levels": 12},
    "run": {"trials": 1, "seed": 99},
})
rows, t1_blob = table1_report(dig_sweep_cfg, eps_list, qubit_budget="small")
print(f"[table1 digital] rows={len(rows)} t={time.time()-t1:.1f}s")
for row in rows:
    if row["row"] == "cell":
        print(f"  slope {row['method']}:{row['mode']} = {row['slope']:.3f}")
    if row["row"] == "recommendation":
        print(f"  recommended={row['recommended']} agreement={row['agreement']}")
data_rows = [r for r in rows if r["row"] == "data"]
for eps in eps_list:
    per_eps = {(r["method"]): (r["OF_total"], r["OF_per_invocation"])
               for r in data_rows if r["eps"] == eps}
    naive = per_eps["naive_nonsmooth"]
    sums = per_eps["sum_in_qae"]
    print(f"  eps=2^{int(round(-__import__('math').log2(eps)))}: "
          f"naive OF={naive[0]} (per_inv {naive[1]}), sum OF={sums[0]} "
          f"(per_inv {sums[1]}), ratio={naive[0]/sums[0]:.1f}")

print(f"total {time.time()-t0:.1f}s")

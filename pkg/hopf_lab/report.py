"""
Report emission. Numbers are written with 17 significant digits so reports
are diff-stable and reproduce bit-identical floats when read back.
"""
import csv
import dataclasses
import io
import json
import math

import numpy as np

SWEEP_HEADER = ("λ", "r", "period", "mu2", "status")


def _float(x):
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def jsonable(obj):
    """Plain containers, complex numbers as {"re", "im"}, numpy arrays as lists."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if f.repr}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _emit(value, indent, out):
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            out.write("{}")
            return
        out.write("{\n")
        for i, (k, v) in enumerate(value.items()):
            out.write(f"{pad}  {json.dumps(k, ensure_ascii=False)}: ")
            _emit(v, indent + 1, out)
            out.write(",\n" if i < len(value) - 1 else "\n")
        out.write(pad + "}")
    elif isinstance(value, list):
        if not value:
            out.write("[]")
            return
        out.write("[\n")
        for i, v in enumerate(value):
            out.write(pad + "  ")
            _emit(v, indent + 1, out)
            out.write(",\n" if i < len(value) - 1 else "\n")
        out.write(pad + "]")
    elif isinstance(value, float):
        out.write(_float(value))
    else:
        out.write(json.dumps(value, ensure_ascii=False))


def dumps(obj):
    out = io.StringIO()
    _emit(jsonable(obj), 0, out)
    out.write("\n")
    return out.getvalue()


def analysis_record(analysis, tol):
    """One analyzed Hopf point: coefficients, verdict, tangents, checklist and tolerances."""
    coeffs = analysis.coeffs
    terms = coeffs.terms
    record = {
        "lambda0": analysis.spec.lambda0,
        "kappa0": analysis.spec.kappa0,
        "kind": analysis.candidate.kind if analysis.candidate is not None else None,
        "phi0": analysis.spec.phi0,
        "phi0_star": analysis.spec.phi0_star,
        "spectrum": analysis.spec.spectrum,
        "coefficients": {
            "re_mu_prime": coeffs.re_mu_prime,
            "im_mixed": coeffs.im_mixed,
            "h11": coeffs.h11,
            "h22_formula": coeffs.h22_formula,
            "h22_track": coeffs.h22_track,
            "det_h0": coeffs.det_h0,
            "mu_prime_track": coeffs.mu_prime_track,
            "h22_consistent": coeffs.h22_consistent,
        },
        "h11_terms": None if terms is None else {
            "cubic": terms.cubic,
            "zero_mode": terms.zero_mode,
            "second_harmonic": terms.second_harmonic,
            "w_zero": terms.w_zero,
            "w_double": terms.w_double,
        },
        "classification": analysis.classification,
        "tangent": analysis.prediction,
        "conditions": analysis.checklist,
        "tolerances": tol,
    }
    if analysis.prediction is not None:
        record["tangent_phi0"] = analysis.prediction.phi0
    return record


def predprey_record(report, tol):
    p = report.params
    return {
        "params": {"d1": p.d1, "d2": p.d2, "k": p.k, "theta": p.theta, "ell": report.geometry.ell},
        "n": report.n,
        "modes": report.modes,
        "geometry": report.geometry,
        "conditions": {"olddd": report.olddd, "newdd": report.newdd},
        "omega0": report.omega0,
        "closed_forms": report.closed,
        "located": report.located,
        "analysis": analysis_record(report.analysis, tol),
    }


def cycle_record(cycle, floquet, tol):
    return {
        "lambda": cycle.lam,
        "period": cycle.period_T,
        "amplitude_r": cycle.amplitude_r,
        "closure": cycle.closure,
        "direction": cycle.direction,
        "phase_grid": cycle.times,
        "samples": cycle.samples,
        "floquet": {
            "multipliers": floquet.multipliers,
            "exponents": floquet.exponents,
            "trivial_index": floquet.trivial_index,
            "mu2": floquet.mu2,
            "stable": floquet.stable,
        },
        "tolerances": tol,
    }


def sweep_csv(rows):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow([_float(row.lam)] + ["" if v is None else _float(v)
                                              for v in (row.r, row.period, row.mu2)] + [row.status])
    return out.getvalue()

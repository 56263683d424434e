"""Built-in scenarios available by name from the command line."""
import math

TWO_PI = 2.0 * math.pi

BUILTINS = {
    "harmonic": {
        "description": "harmonic oscillator H = (x1^2+p1^2)/2, conservative",
        "name": "harmonic",
        "dimension": 1,
        "system": {"normal_form": {"H": "(x1^2+p1^2)/2", "terms": []}},
        "initial": {"t0": 0.0, "x": [1.0], "p": [0.0]},
        "run": {"t1": TWO_PI, "h": 1e-3},
        "checks": ["energy_balance", "classical_reduction", "energy_drift",
                   "canonical_relations", "poisson_identities"],
        "seed": 1729,
    },
    "damped": {
        "description": "damped oscillator, eta = dH - mu dv with mu = -0.1*p1, v = x1",
        "name": "damped",
        "dimension": 1,
        "system": {"normal_form": {
            "H": "(x1^2+p1^2)/2",
            "terms": [{"mu": "-0.1*p1", "v": "x1"}],
            "eta": {"P": "0", "F": ["-x1 - 0.1*p1"], "v": ["p1"]},
        }},
        "initial": {"t0": 0.0, "x": [1.0], "p": [0.0]},
        "run": {"t1": 10.0, "h": 1e-3},
        "checks": ["energy_balance", "normal_form_consistency", "bracket_decomposition"],
        "seed": 1729,
    },
    "rotating_frame": {
        "description": "planar isotropic oscillator seen from a frame rotating at unit rate",
        "name": "rotating_frame",
        "dimension": 2,
        "system": {"lagrangian": "(v1^2 + v2^2 - x1^2 - x2^2)/2"},
        "initial": {"t0": 0.0, "x": [1.0, 0.0], "v": [0.0, 1.0]},
        "run": {"t1": TWO_PI, "h": 1e-3},
        "frame": {"omega": [[0.0, -1.0], [1.0, 0.0]]},
        "checks": ["integrability", "rotating_frame", "euler_lagrange", "energy_theorem", "newtonian"],
        "seed": 1729,
    },
    "free_hj": {
        "description": "free particle with complete integral S = k*x1 - k^2*t/2, k = 2",
        "name": "free_hj",
        "dimension": 1,
        "system": {"normal_form": {"H": "p1^2/2", "terms": []}},
        "initial": {"t0": 0.0, "x": [0.0], "p": [2.0]},
        "run": {"t1": 1.0, "h": 1e-3},
        "hj": {"S": "2*x1 - 2*t"},
        "checks": ["hj_residual", "generalized_hj", "closure", "characteristics", "energy_balance"],
        "seed": 1729,
    },
    "legendre_quadratic": {
        "description": "mass-2 oscillator L = v1^2 - x1^2, H = p1^2/4 + x1^2",
        "name": "legendre_quadratic",
        "dimension": 1,
        "system": {"lagrangian": "v1^2 - x1^2"},
        "initial": {"t0": 0.0, "x": [1.0], "v": [0.0]},
        "run": {"t1": 5.0, "h": 1e-3},
        "checks": ["legendre_roundtrip", "euler_lagrange", "energy_theorem", "symbolic_derivatives"],
        "seed": 1729,
    },
}

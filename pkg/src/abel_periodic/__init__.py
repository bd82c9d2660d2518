"""Periodic solutions of polynomial ODEs with trigonometric coefficients.

``x' = a_0(t) + a_1(t) x + ... + a_m(t) x^m`` with 1-periodic trigonometric
polynomials ``a_i``.  The package certifies alternating-sign line and curve
hypotheses that bound the number of isolated periodic solutions by ``m``, and
locates and classifies those solutions through the time-1 return map.
"""
from .certify import (CertificationError, HypothesisCertificate, NoAdmissibleSubsequence, NotCertifiable,
                      WrongNodeCount, certify_C, certify_H, certify_H_prime, compose, decompose,
                      has_constant_periodic_solution, suggest_nodes)
from .equation import AbelEquation, CurveFamily, det_along_curve, eval_S, transform
from .flow import (EmptyUsableRange, PeriodicSolution, PeriodicSolutionReport, assign_components,
                   component_of, find_periodic_solutions, perturb)
from .integrate import IntegrationConfig, StepSizeUnderflow, integrate, inverse_return_map, return_map
from .poly import IsolatedRoot, Polynomial, PrecisionMismatch, isolate_real_roots, lagrange_node_product
from .serialize import EquationFile, EquationFileError, load_equation, loads_equation
from .trig import TrigPoly, certify_sign

__all__ = [
    "AbelEquation", "CurveFamily", "TrigPoly", "Polynomial", "IsolatedRoot", "PrecisionMismatch",
    "isolate_real_roots", "lagrange_node_product", "certify_sign", "eval_S", "transform", "det_along_curve",
    "CertificationError", "NotCertifiable", "NoAdmissibleSubsequence", "WrongNodeCount", "HypothesisCertificate",
    "certify_H", "certify_H_prime", "certify_C", "suggest_nodes", "has_constant_periodic_solution",
    "decompose", "compose", "IntegrationConfig", "StepSizeUnderflow", "integrate", "return_map",
    "inverse_return_map", "EmptyUsableRange", "PeriodicSolution", "PeriodicSolutionReport",
    "find_periodic_solutions", "assign_components", "component_of", "perturb", "EquationFile",
    "EquationFileError", "load_equation", "loads_equation",
]

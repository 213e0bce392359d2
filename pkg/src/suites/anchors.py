"""
Anchors — the static table of reference anchors carried by report entries.

Every entry a suite emits names one of these keys; the runner refuses
anything else, so a report never points at an anchor that is not shipped.
"""

from __future__ import annotations

from src.errors import ConfigError

ANCHORS: dict[str, str] = {
    # kernel identities
    "log-two-terms": "log((x+mħ)/(x-mħ)) equals G(∂)[m]x^{-1}",
    "log-four-terms": "log of the four-factor kernel equals -G·G·[m]·[κ]x^{-2}",
    "sing-res-fact": "singular part and residue of (x-bħ)^{-1}F factor through F(bħ, ħ)",
    "sing-simple": "Sing_z of A(z) with (z-μħ)A(z) regular is a simple pole term",
    "gl-relation": "operator identity -G·q^{-1} = -2ħL(-2ħ·)",
    "gql-level": "operator identity G·q^{-ℓ} = 2ħL(-2ħ·)q^{1-ℓ}",
    "serre-kernel": "rational kernel identities behind the Serre equivalence",
    "delta-decomp": "ι_{z,w} minus ι_{w,z} of (z-w)^{-j-1} is the j-th δ derivative",
    "delta-shifted": "the shifted δ decomposition at z = w + cħ",
    "f-g-inverse": "operator identity F∘G = 1",
    "g-bracket": "operator identity G∘[m] = G_m",
    # Fock model
    "heisenberg-gamma": "structure constants γ_ij = [a_ij][ℓ](x+ℓħ)^{-2} against the sinh oracle",
    "heisenberg-classical": "the ħ = 0 Cartan bracket is a_ij·ℓ·∂δ",
    "heisenberg-bracket": "mode brackets of h_i(x) on the Fock space against the kernel",
    "heisenberg-vacuum": "annihilation modes kill the vacuum",
    "ye-k-independence": "Y_E products do not depend on the auxiliary exponent k",
    "zero-mode-formula": "u_(n)v = (-μħ)^n u_(0)v and the zero mode under an exchange relation",
    "exp-calculus": "exponential of an iterate factors as exp(½E)·exp β·exp α",
    "iterate-formula": "three expressions for Y(E^-(-a, z)1, x) agree",
    "ci-expression": "explicit grouplike expression for the shifted Cartan exponential",
    "weak-associativity": "weak associativity with the minimal valid exponent l",
    "s-jacobi": "commutator equals its Y_E products plus the shift part",
    "restrictedness": "a(x)b_m w is bounded below as the relation predicts",
    # classical affine module
    "affine-dimensions": "graded dimensions of the vacuum module are colored partition numbers",
    "affine-vacuum": "annihilation modes of the loop algebra kill the vacuum",
    "affine-relations": "mode relations of the affine algebra at ħ = 0",
    "affine-weak-associativity": "weak associativity of e(x), f(x) on the vacuum module",
    "affine-restrictedness": "restrictedness of e(x), f(x) under the e-f commutator",
    # presentations
    "presentation": "old and new current presentations imply each other",
    "dy7-control": "the a_ij = 0 commutation is needed to resolve x^±_i x^±_j",
    "serre-equivalence": "Serre relation, a-c exchange and evaluation criterion agree",
    # negative controls
    "negative-control": "a deliberately perturbed input must fail with a witness",
}


def require(anchor: str) -> str:
    if anchor not in ANCHORS:
        raise ConfigError(f"anchor {anchor!r} is not in the anchor table")
    return anchor

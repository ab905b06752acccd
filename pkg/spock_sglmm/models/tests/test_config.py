import json

import pytest
from nengo.exceptions import ReadonlyError
from nengo.params import Default

from spock_sglmm.exceptions import InvalidParameter
from spock_sglmm.models import McmcConfig, ModelSpec, PriorConfig
from spock_sglmm.precisions import IcarFamily, LerouxFamily
from spock_sglmm.simulation import ScenarioConfig


def test_defaults():
    priors = PriorConfig()
    assert priors.beta_precision == 1e-6
    assert priors.tau_shape == 0.5
    assert priors.tau_rate == 0.0005

    mcmc = McmcConfig()
    assert (mcmc.n_iter, mcmc.n_burn, mcmc.thin) == (10000, 2000, 1)
    assert mcmc.rw_scale == 0.1
    assert mcmc.adapt
    assert mcmc.n_draws == 8000

    spec = ModelSpec()
    assert spec.family == "gaussian"
    assert spec.method == "spock"
    assert spec.spatial_family is IcarFamily()
    assert spec.reconstruction == "knn"


def test_draw_count():
    assert McmcConfig(n_iter=1000, n_burn=200, thin=4).n_draws == 200
    assert McmcConfig(n_iter=1001, n_burn=200, thin=4).n_draws == 201


def test_invalid_values():
    with pytest.raises(InvalidParameter):
        PriorConfig(tau_shape=0.0)
    with pytest.raises(InvalidParameter):
        PriorConfig(beta_precision=-1.0)
    with pytest.raises(InvalidParameter):
        McmcConfig(n_iter=100, n_burn=100)
    with pytest.raises(InvalidParameter):
        McmcConfig(thin=0)
    with pytest.raises(InvalidParameter):
        ModelSpec(method="sar")
    with pytest.raises(InvalidParameter):
        ModelSpec(family="binomial")


def test_rhz_and_hh_need_icar():
    with pytest.raises(InvalidParameter):
        ModelSpec(method="rhz", spatial_family=LerouxFamily(0.5))
    with pytest.raises(InvalidParameter):
        ModelSpec(method="hh", spatial_family="proper_car")
    ModelSpec(method="spock", spatial_family="proper_car")


def test_cross_field_rules():
    with pytest.raises(InvalidParameter):
        ModelSpec(method="icar", h=5)
    with pytest.raises(InvalidParameter):
        ModelSpec(method="icar", learn_spatial_parameter=True)
    with pytest.raises(InvalidParameter):
        ModelSpec(family="poisson", fixed_tau_e=1.0)
    spec = ModelSpec(
        method="icar", spatial_family="leroux", learn_spatial_parameter=True
    )
    assert spec.spatial_family == LerouxFamily(0.5)


def test_dict_round_trip():
    spec = ModelSpec(
        family="poisson",
        method="hh",
        h=7,
        priors=PriorConfig(tau_rate=0.01),
        mcmc=McmcConfig(n_iter=500, n_burn=100, seed=3),
        fixed_tau_theta=2.0,
    )
    d = json.loads(json.dumps(spec.to_dict()))
    assert d["priors"]["tau_rate"] == 0.01
    assert d["spatial_family"] == {"name": "icar"}
    restored = ModelSpec.from_dict(d)
    assert restored == spec
    assert restored.config_hash() == spec.config_hash()

    leroux = ModelSpec(spatial_family=LerouxFamily(0.8))
    assert ModelSpec.from_dict(leroux.to_dict()).spatial_family.lam == 0.8
    assert leroux.config_hash() != spec.config_hash()


def test_from_dict_rejects_unknown_fields():
    with pytest.raises(InvalidParameter):
        ModelSpec.from_dict({"method": "lm", "iterations": 10})


def test_replace_and_seed():
    spec = ModelSpec(method="icar")
    assert spec.replace(method="lm").method == "lm"
    assert spec.method == "icar"
    mcmc = McmcConfig(n_iter=300, n_burn=100).with_seed(12)
    assert mcmc.seed == 12
    assert mcmc.n_iter == 300


def test_frozen():
    spec = ModelSpec()
    with pytest.raises(ReadonlyError):
        spec.method = "lm"


def test_default_arguments_resolve_to_parameter_defaults():
    assert PriorConfig(beta_precision=Default) == PriorConfig()
    mcmc = McmcConfig(n_iter=Default, seed=Default)
    assert mcmc.n_iter == 10000
    assert mcmc.seed is None
    assert ModelSpec(method=Default, priors=Default).method == "spock"
    scenario = ScenarioConfig()
    assert scenario.scenario == "rhz"
    assert scenario.beta == (2.0, 1.0, -1.0)
    assert ScenarioConfig(n_replicates=Default).n_replicates == 200

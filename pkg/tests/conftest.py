from hypothesis import HealthCheck, settings

settings.register_profile(
    "kslogistic",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("kslogistic")

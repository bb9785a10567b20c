from hypothesis import HealthCheck, settings

# scipy warm-up on first call can trip the per-example deadline
settings.register_profile(
    "covertlink",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("covertlink")

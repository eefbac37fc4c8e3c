import hypothesis

hypothesis.settings.register_profile(
    "popkit",
    deadline=None,
    max_examples=25,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
    derandomize=True,
)
hypothesis.settings.load_profile("popkit")

def pytest_configure(config):
    config.addinivalue_line("markers", "slow: checks at the full acceptance sizes")

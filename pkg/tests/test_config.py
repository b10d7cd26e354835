from config import Config, ProductionConfig, TestingConfig, get_config


def test_production_needs_no_secret():
    assert not hasattr(Config, "SECRET_KEY")
    result = ProductionConfig.validate_production_config()
    assert result["valid"], result["errors"]


def test_error_fraction_range():
    class Broken(TestingConfig):
        VERIFY_MAX_ERROR_FRACTION = 1.5

    errors = Broken.validate_config()["errors"]
    assert any("RCF_VERIFY_MAX_ERROR_FRACTION" in e for e in errors)
    assert TestingConfig.get_summary()["tolerances"]["verify_max_error_fraction"] == 0.1


def test_get_config():
    assert get_config("testing") is TestingConfig
    assert get_config("unknown").__name__ == "DevelopmentConfig"

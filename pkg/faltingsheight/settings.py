import os
import yaml
from dotenv import load_dotenv
from typing import List
from faltingsheight.data import CliConfig
from faltingsheight.exceptions import ContractError

ENV_PREFIX = "FALTINGS_"
OUTPUT_FORMATS = ["json", "csv", "text"]


def env_name(setting: str) -> str:
    return ENV_PREFIX + setting.upper().replace("-", "_")


class Settings:
    """
    Settings (precision, tolerances, window constants, etc.)
    """

    def __init__(self, path: str, env_file: str = ".env"):
        self.setting_source: str = "yaml"
        self.setting_path: str = path
        if not os.path.exists(self.setting_path):
            raise ValueError(f"Setting file {self.setting_path} not found")
        with open(self.setting_path, "r") as file:
            self.settings = yaml.safe_load(file) or {}
        if env_file and os.path.exists(env_file):
            load_dotenv(env_file)
        self.overrides = {}

    def set_setting(self, setting: str, value):
        """Override a setting for this run only"""
        self.overrides[setting] = value

    def get_setting(self, setting: str):
        if setting in self.overrides:
            return self.overrides[setting]
        if env_name(setting) in os.environ:
            return yaml.safe_load(os.environ[env_name(setting)])
        setting_value = None
        if setting in self.settings.keys():
            setting_value = self.settings[setting]
        else:
            for key in self.settings.keys():
                if type(self.settings[key]) == dict:
                    if setting in self.settings[key].keys():
                        setting_value = self.settings[key][setting]
        if setting_value is None:
            raise ContractError(f"Setting {setting} not found in {self.setting_path}")
        return setting_value

    def check_settings(self, settings: List[str]):
        missing_settings = []
        for setting in settings:
            try:
                self.get_setting(setting)
            except ValueError:
                missing_settings.append(setting)
        if missing_settings:
            raise ContractError(
                f"Missing settings {', '.join(missing_settings)} in {self.setting_path}"
            )

    def numerics(self) -> CliConfig:
        """Numeric run configuration, validated"""
        self.check_settings(["precision_bits", "tolerance", "threads", "format"])
        config = CliConfig(
            precision_bits=int(self.get_setting("precision_bits")),
            tolerance=float(self.get_setting("tolerance")),
            threads=int(self.get_setting("threads")),
            format=str(self.get_setting("format")),
        )
        if config.precision_bits < 53:
            raise ContractError("precision_bits must be at least 53")
        if not config.tolerance > 0:
            raise ContractError("tolerance must be positive")
        if config.threads < 1:
            raise ContractError("threads must be at least 1")
        if config.format not in OUTPUT_FORMATS:
            raise ContractError(
                f"format must be one of {', '.join(OUTPUT_FORMATS)}, got {config.format}"
            )
        return config

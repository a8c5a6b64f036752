from .config import Conf, YamlAttr, preset_path

__all__ = ["Conf", "YamlAttr", "preset_path"]

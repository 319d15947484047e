from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("matargs")
except PackageNotFoundError:
    from .backend.tools.misc import get_project_version

    __version__ = get_project_version()

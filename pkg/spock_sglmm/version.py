"""Version of spock_sglmm.

Versions follow https://semver.org/ in PEP 440 form. Development states
carry a ``.devN`` suffix; releases set ``dev = None`` and are tagged in git.
"""

name = "spock_sglmm"
version_info = (0, 1, 0)  # (major, minor, patch)
dev = 0

version = "{v}{dev}".format(
    v=".".join(str(v) for v in version_info),
    dev="" if dev is None else ".dev{:d}".format(dev),
)

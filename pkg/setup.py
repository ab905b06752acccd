#!/usr/bin/env python
import io
import os
import runpy
import sys

try:
    from setuptools import find_packages, setup
except ImportError:
    raise ImportError(
        "'setuptools' is required but not installed. To install it, "
        "follow the instructions at "
        "https://pip.pypa.io/en/stable/installing/#installing-with-get-pip-py"
    )


def read(*filenames, **kwargs):
    encoding = kwargs.get("encoding", "utf-8")
    sep = kwargs.get("sep", "\n")
    buf = []
    for filename in filenames:
        with io.open(filename, encoding=encoding) as f:
            buf.append(f.read())
    return sep.join(buf)


root = os.path.dirname(os.path.realpath(__file__))
version = runpy.run_path(os.path.join(root, "spock_sglmm", "version.py"))["version"]
testing = "test" in sys.argv or "pytest" in sys.argv

docs_require = [
    "sphinx",
]
install_requires = [
    "joblib>=0.14",
    "nengo>=3.0",
    "networkx>=2.4",
    "numpy>=1.17",
    "pandas>=1.0",
    "scipy>=1.4",
]
tests_require = [
    "matplotlib>=2.0",
    "pytest>=6.0",
    "pytest-plt",
    "pytest-rng",
    "statsmodels>=0.11",
]

setup(
    name="spock_sglmm",
    version=version,
    author="spock_sglmm contributors",
    url="https://github.com/spock-sglmm/spock-sglmm",
    packages=find_packages(),
    license="MIT",
    description="Spatial confounding diagnostics and spatial generalized "
    "linear mixed models on projected neighborhood graphs",
    long_description=read("README.rst", "CHANGES.rst"),
    zip_safe=False,
    include_package_data=True,
    python_requires=">=3.7",
    setup_requires=["pytest-runner"] if testing else [],
    install_requires=install_requires,
    extras_require={
        "all": docs_require + tests_require,
        "docs": docs_require,
        "tests": tests_require,
    },
    tests_require=tests_require,
    entry_points={"console_scripts": ["spock-sglmm = spock_sglmm.cli:main"]},
    classifiers=[  # https://pypi.python.org/pypi?%3Aaction=list_classifiers
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3.7",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)

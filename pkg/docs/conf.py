# -*- coding: utf-8 -*-
#
# This file is execfile()d with the current directory set
# to its containing dir.

import sys

try:
    import spock_sglmm
except ImportError:
    print(
        "To build the documentation, spock_sglmm must be installed in the "
        "current environment. Please install it and its requirements first. "
        "A virtualenv is recommended!"
    )
    sys.exit(1)

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.doctest",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
]

default_role = "py:obj"
numfig = True

# -- sphinx.ext.autodoc
autoclass_content = "both"  # class and __init__ docstrings are concatenated
autodoc_default_options = {
    "members": None,
}
autodoc_member_order = "bysource"  # default is alphabetical

# -- sphinx.ext.intersphinx
intersphinx_mapping = {
    "nengo": ("https://www.nengo.ai/nengo/", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
    "pandas": ("https://pandas.pydata.org/docs/", None),
}

# -- doctest
doctest_global_setup = "import spock_sglmm"

# -- sphinx
exclude_patterns = ["_build"]
source_suffix = ".rst"
source_encoding = "utf-8"
master_doc = "index"

project = "spock_sglmm"
authors = "spock_sglmm contributors"
copyright = spock_sglmm.__copyright__
version = ".".join(spock_sglmm.__version__.split(".")[:2])  # Short X.Y version
release = spock_sglmm.__version__  # Full version, with tags
pygments_style = "friendly"

# -- Options for HTML output --------------------------------------------------

html_theme = "alabaster"
html_title = "spock_sglmm {0} docs".format(release)
htmlhelp_basename = "spock_sglmmdoc"
html_last_updated_fmt = ""  # Suppress 'Last updated on:' timestamp
html_show_sphinx = False

# -- Options for LaTeX output -------------------------------------------------

latex_elements = {
    "papersize": "letterpaper",
    "pointsize": "11pt",
}

latex_documents = [
    # (source start file, target, title, author, documentclass [howto/manual])
    ("index", "spock_sglmm.tex", html_title, authors, "manual"),
]

# -- Options for manual page output -------------------------------------------

man_pages = [
    # (source start file, name, description, authors, manual section).
    ("index", "spock-sglmm", html_title, [authors], 1)
]

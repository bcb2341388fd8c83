"""Build script: compiles the RK4 moment kernel when Cython is available.

The package is fully functional without the extension; `cohobs.moments`
falls back to a NumPy implementation with identical semantics.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [Extension("cohobs._rk4_cy", ["src/cohobs/_rk4_cy.pyx"])],
        language_level=3,
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)

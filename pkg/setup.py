""" Gmcclib module setup. """

from setuptools import setup

setup(
    use_scm_version={"fallback_version": "0.1.0"},
    setup_requires=["setuptools_scm"],
    name="gmcclib",
    packages=["gmcclib"],
    entry_points={"console_scripts": ["gmcc = gmcclib.cli:main"]},
    python_requires=">=3.10",
    install_requires=["numpy>=1.22", "scipy>=1.8", "pandas>=1.5"],
    tests_require=["pytest"],
    extras_require={"test": ["pytest"]},
    license="MIT",
    description="Generalized correntropy adaptive filters, steady-state theory and Monte Carlo experiments",
    include_package_data=True,
)

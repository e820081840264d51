from io import open
from setuptools import setup, find_packages


def read(f):
    return open(f, "r").read()


setup(
    name="singflow",
    version='0.1.0',
    packages=find_packages(exclude=("tests", "tests.*", "docs", "examples", "configs")),
    install_requires=[
        "pydantic>=1.10,<2",
        "numpy>=1.21",
        "scipy>=1.7",
        "pandas>=1.5",
        "toml>=0.10.2",
    ],
    extras_require={"test": ["pytest>=6.2"]},
    entry_points={"console_scripts": ["singflow=singflow.cli:main"]},
    description="Singular-flow experiments: conical shocks, Prandtl layers, vortex sheets",
    license="MIT",
    python_requires=">=3.8",
    long_description=read("README.md"),
    long_description_content_type="text/markdown",
)

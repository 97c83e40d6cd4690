import os
from setuptools import find_packages, setup


def read(fname):
    return open(os.path.join(os.path.dirname(__file__), fname)).read()


setup(
    name="hbf",
    version="0.1.0",
    author="Ryan Marchildon",
    description=("Holographic Bloom Filter: superposed key/value memories and their bounds"),
    license="BSD",
    packages=find_packages(include=["src", "src.*"]),
    long_description=read("README.md"),
    setup_requires=["black"],
    install_requires=read("requirements.txt"),
    entry_points={"console_scripts": ["hbf=src.hbf.entrypoints.cli:main"]},
)

# Add the `src/` folder to the path (on the front to avoid collisions with
# previously installed versions
import os
import sys

sys.path.insert(0, os.getcwd() + "/src/")
import tktp
# read in the README for the long description
with open('README.md', 'r') as f:
    readme = f.read()

from setuptools import setup

setup(
    name="tktp",
    version=tktp.__version__,
    description="Command line utility for finding the most associated "
        "subset of a bivariate sample along its Kendall tau path.",
    long_description=readme,

    packages=[
        "tktp",
        "tktp.commands",
        "tktp.test",
    ],
    package_dir={
        "tktp": "src/tktp/",
        "tktp.commands": "src/tktp/commands/",
        "tktp.test": "src/tktp/test/",
    },
    install_requires=[
        "click>=7.0",
        "colorama",
        "numpy>=1.20",
        "scipy>=1.6",
        "pandas>=1.2",
    ],
    entry_points={
        "console_scripts": [
            "tktp = tktp:main"
        ],
    },
)

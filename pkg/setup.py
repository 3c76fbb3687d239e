from setuptools import setup, find_packages

setup(
    name="risk-region-aggregation",
    version="1.0.0",
    description="Problem-driven scenario generation for stochastic programs with tail risk measures",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(include=["riskagg", "riskagg.*"]),
    install_requires=[
        "numpy>=1.21.0",
        "scipy>=1.9.0,<1.12",  # scipy 1.12-1.15 nnls can return non-optimal solutions
        "pandas>=1.5.0",
        "pyyaml>=5.4.0",
        "jsonlines>=2.0.0",
        "tqdm>=4.60.0",
    ],
    extras_require={
        "test": ["pytest>=7.0"],
    },
    python_requires=">=3.8",
    entry_points={
        "console_scripts": [
            "riskagg=riskagg.cli.riskagg_run:cli_main",
            "riskagg-report=riskagg.cli.riskagg_report:main",
        ],
    },
    classifiers=[
        "Development Status :: 5 - Production/Stable",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],

)

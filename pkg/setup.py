from setuptools import setup, find_packages

setup(
    name="wsn-fusion",
    version="0.1",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    py_modules=["run_experiment"],
    install_requires=[
        "numpy",
        "scipy",
        "pandas",
        "pydantic>=2",
        "python-dotenv",
    ],
    extras_require={"test": ["pytest"]},
    entry_points={
        "console_scripts": [
            "wsn-fusion=run_experiment:main",
        ],
    },
)

import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="pulsecascade",
    version="0.1.0",
    description="Quantum pulses scattering on local quantum systems, by cascaded virtual cavities",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    install_requires=[
        "numpy>=1.20",
        "scipy>=1.6",
    ],
    entry_points={"console_scripts": ["pulsecascade=pulsecascade.cli:main"]},
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires="~=3.8",  # Python >= 3.8 but < 4
    keywords=["quantum optics", "master equation", "input-output theory", "quantum pulses"],
)

import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name='cwtoolkit',
    version="0.1.0",
    license='Apache',
    description='Multi-echelon cyber-warfare game toolkit',
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=['cwtoolkit', 'cwtoolkit.meta', 'cwtoolkit.paradox', 'cwtoolkit.scenario'],
    #packages=setuptools.find_packages(),
    install_requires=[
        'numpy',
        'scipy',
        'pandas',
        'h5py',
        'joblib',
        'matplotlib',
        'pydantic>=2',
        'networkx',
    ],
    extras_require={'test': ['pytest']},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: Apache License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8',
    #NOTE: main() returns the exit code; console_scripts passes it to sys.exit
    entry_points={'console_scripts': ['cwgame=cwtoolkit.cwgame:main']},
)

import os
import re
from setuptools import setup, find_packages

# Read version from __init__.py
with open(os.path.join('honeycomb_walk', '__init__.py'), 'r', encoding='utf-8') as f:
    version = re.search(r'__version__\s*=\s*[\'"]([^\'"]*)[\'"]', f.read()).group(1)

# Read README.md for long description
with open('README.md', 'r', encoding='utf-8') as f:
    long_description = f.read()

setup(
    name='honeycomb-walk',
    version=version,
    description='Random walks on oriented honeycomb lattices: simulation, exact oracles and recurrence diagnostics',
    long_description=long_description,
    long_description_content_type='text/markdown',
    author='honeycomb-walk developers',
    packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    python_requires='>=3.8',
    keywords='random walk, random environment, honeycomb lattice, recurrence, monte carlo',
    install_requires=[
        'numpy>=1.20',
        'scipy>=1.7',
    ],
    entry_points={
        'console_scripts': [
            'honeycomb-walk=honeycomb_walk.cli:main',
        ],
    },
)

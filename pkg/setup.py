from io import open
from setuptools import find_packages, setup

setup(
    name="splinebayes",
    version="1.0a0",
    description="Smoothing spline estimates, tuning prior pseudo-posteriors and credible set coverage",
    long_description=open("README.md", "r", encoding='utf-8').read(),
    long_description_content_type="text/markdown",
    keywords='smoothing spline, nonparametric bayes, credible region, gaussian process, generalized cross validation',
    license='',
    packages = find_packages(exclude=['test']),
    package_dir = {'':'.'},
    package_data={'': ['*.py', '*.yaml']},
    install_requires=['numpy', 'scipy', 'pyyaml', 'scikit-learn'],
    entry_points={
      'console_scripts':  ["splinebayes=splinebayes.cli:main"]
    },
    python_requires='>=3.6.0',
    classifiers=[
          'Intended Audience :: Science/Research',
          'Programming Language :: Python :: 3',
          'Topic :: Scientific/Engineering :: Mathematics',
    ],
)

import unittest
from setuptools import setup, find_packages


def my_test_suite():
    test_loader = unittest.TestLoader()
    test_suite = test_loader.discover('tests', pattern='test_*.py')
    return test_suite


if __name__ == '__main__':
    setup(name='pai_mlca',
          version='0.1.0',
          description='Two-step estimation of multilevel latent class models with covariates',
          license='MIT',
          packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
          python_requires='>=3.7',
          install_requires=['scikit-learn>=0.22',
                            'numpy>=1.17',
                            'pandas>=1.0',
                            'scipy>=1.4',
                            'statsmodels>=0.10',
                            'patsy>=0.5.1',
                            'six>=1.13.0',
                            'tqdm>=4.10.0',
                            'distributed>=2.9.1'],
          tests_require=['pytest>=4.6', 'pytest-cov', 'pytest-xdist', 'mock>=2.0'],
          entry_points={'console_scripts': ['run_mlca=pai_mlca.scripts.run_mlca:main']},
          test_suite='setup.my_test_suite')

import setuptools

readme = open('README.md').read()
history = open('HISTORY.md').read().replace('.. :changelog:', '')
requirements = open('requirements.txt').read().splitlines()

setuptools.setup(
    name='aplorder',
    version='0.1.0',
    description='Extreme portfolio loss diversification and the '
                'asymptotic portfolio loss order',
    long_description=readme + '\n\n' + history,
    long_description_content_type='text/markdown',
    license='MIT',
    packages=setuptools.find_packages(exclude=['tests']),
    setup_requires=['pytest-runner'],
    install_requires=requirements,
    package_dir={'aplorder': 'aplorder'},
    package_data={'aplorder': ['data/*.json']},
    tests_require=requirements + ['pytest'],
    entry_points={'console_scripts': ['aplorder=aplorder.cli:main']},
    keywords='extreme value theory,spectral measure,regular variation,'
             'diversification,stochastic order',
    classifiers=['Intended Audience :: Science/Research',
                 'Development Status :: 3 - Alpha',
                 'Programming Language :: Python',
                 'Programming Language :: Python :: 3'],
    zip_safe=False)

from setuptools import setup

setup(
    name='spnn_loss_crosstalk',
    version='0.1.0',
    description='Loss and crosstalk simulation of Clements-mesh photonic '
                'neural networks.',
    author='spnn_loss_crosstalk authors',
    packages=['spnn_loss_crosstalk', 'spnn_loss_crosstalk.analysis',
              'spnn_loss_crosstalk.experiments'],
    package_data={'spnn_loss_crosstalk.experiments': ['configs/*.gin']},
    python_requires='>=3.8',
    install_requires=['absl-py', 'gin-config', 'numpy', 'pandas>=1.5',
                      'torch', 'tensorboard'],
    entry_points={
        'console_scripts': [
            'spnn-experiment = spnn_loss_crosstalk.experiments.run:run_main',
        ],
    },
)

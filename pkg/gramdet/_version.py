"""gramdet version info."""
# Keep the results version in step with the JSON layout written by core/results.py

__version__ = '0.3.0.dev2'
__short_version__ = '0.3'
__config_version__ = '1'
__results_version__ = '1'

# pylint: disable-msg=invalid-name
version = f"gramdet v{__version__}"
'''A friendly version string for this build of gramdet.'''

# pylint: disable-msg=invalid-name
extended_version = f"gramdet v{__version__} (config_version={__config_version__}, results_version={__results_version__})"
'''An extended version string that includes the config and results versions.'''

from gramdet._version import __short_version__
print("{}.x".format(__short_version__))

# How to add a test:
# Copy this file
# Rename TestTemplate to TestWhatever in line 8
# Put any data files the test needs in tests/data_files and load them with get_data_file()

from gramdet.tests.GramDetTestCase import GramDetTestCase


class TestTemplate(GramDetTestCase):

    def test_something(self):
        pass

"""bregqn test suite"""
